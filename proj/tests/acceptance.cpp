// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
#include "affect/dataset_io.hpp"
#include "affect/dsp.hpp"
#include "affect/ecg_features.hpp"
#include "affect/elm.hpp"
#include "affect/labels.hpp"
#include "affect/pipeline.hpp"
#include "affect/synth.hpp"
#include "affect/text.hpp"

#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

using namespace affect;
using namespace affect::pipeline;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %-22s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Runs one criterion; an exception counts as a failure.
void criterion(const std::string& name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
  }
  report(name, ok, detail);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<double> noise(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

bool feature_widths(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset d = synth::generate_synthetic_dataset(4, 16, 3);
  ExperimentConfig cfg;
  cfg.fusion_groups = {{FeatureSet::EEG, FeatureSet::FaceAu}};
  const ExtractedData x = extract_all(d, cfg);
  const auto& f = x.features;
  const FusedMatrix fused = fuse({&f.at(FeatureSet::EEG), &f.at(FeatureSet::FaceAu)}, x.split.train);
  const double secs = seconds_since(t0);
  const long w[] = {f.at(FeatureSet::EEG).width(), f.at(FeatureSet::ECG).width(), f.at(FeatureSet::GSR).width(),
                    f.at(FeatureSet::FaceAu).width(), f.at(FeatureSet::FaceEmbed).width(), fused.matrix.width()};
  std::ostringstream s;
  s << "eeg=" << w[0] << " ecg=" << w[1] << " gsr=" << w[2] << " face_au=" << w[3] << " face_embed=" << w[4]
    << " eeg+face_au=" << w[5] << " trials=" << d.trials.size() << fmt(" time=%.1fs (limit 60s)", secs);
  detail = s.str();
  return w[0] == 187 && w[1] == 2 && w[2] == 8 && w[3] == 90 && w[4] == 50 && w[5] == 277 &&
         d.trials.size() == 64 && secs < 60.0;
}

bool compensation(std::string& detail) {
  const double worked = compensate_baseline(9, 2);
  std::ifstream in(std::string(AFFECT_TEST_DATA) + "/label_grid.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0, bad = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<std::string> c;
    for (std::string v; std::getline(ss, v, ',');) c.push_back(v);
    const double v = std::stod(c[0]), a = std::stod(c[1]);
    bad += c[2] != level_name(binarize(v)) || c[3] != level_name(binarize(a)) ||
           c[4] != quadrant_name(quadrant4(v, a)) || c[5] != octant_name(octant8(v, a));
    ++rows;
  }
  detail = fmt("(9,2)->%g; grid rows=%g mismatches=%g", worked, rows, bad);
  return worked == 6.0 && rows == 289 && bad == 0;
}

bool conditional_entropy(std::string& detail) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(2, 512), bins(2, 16), shape(0, 2);
  double worst = 0.0;
  bool exact = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = static_cast<std::size_t>(len(rng));
    const int nb = bins(rng);
    auto x = noise(n, rng);
    auto y = noise(n, rng);
    if (shape(rng) == 0) {
      for (std::size_t i = 0; i < n; ++i) y[i] = 0.7 * x[i] + 0.3 * y[i];
    }
    worst = std::max(worst, std::abs(dsp::conditional_entropy(x, y, nb) - oracle::conditional_entropy(x, y, nb)));
    // H(X) in the closed form (n log2 n - sum c log2 c) / n over ascending bins.
    const std::vector<double> c(n, 1.5);
    std::vector<std::size_t> counts(static_cast<std::size_t>(nb), 0);
    for (int k : dsp::histogram_bins(x, nb)) ++counts[static_cast<std::size_t>(k)];
    double s = 0.0;
    for (std::size_t k : counts) {
      if (k > 0) s += static_cast<double>(k) * std::log2(static_cast<double>(k));
    }
    const double dn = static_cast<double>(n);
    const double hx = (dn * std::log2(dn) - s) / dn;
    exact = exact && dsp::conditional_entropy(x, x, nb) == 0.0 && dsp::conditional_entropy(x, c, nb) == hx &&
            std::abs(hx - oracle::entropy(x, nb)) <= 1e-12;
  }
  detail = fmt("max |H - oracle| = %.3g bits over 200 pairs (tol 1e-9); exact identities ", worst) +
           (exact ? "hold" : "violated");
  return worst <= 1e-9 && exact;
}

bool pnn50_and_twave(std::string& detail) {
  const auto a = ecg::pnn50({{800, 860, 800, 860}});
  const auto b = ecg::pnn50({{800, 840, 800}});
  const double rate = 128.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rr(0.7, 1.1);
  std::vector<double> beats{0.6};
  while (beats.back() < 58.0) beats.push_back(beats.back() + rr(rng));
  std::vector<double> x(static_cast<std::size_t>(60 * rate), 0.0);
  auto bump = [&](double c, double h, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dt = static_cast<double>(i) / rate - c;
      x[i] += h * std::exp(-0.5 * dt * dt / (s * s));
    }
  };
  for (double t : beats) {
    bump(t, 1000.0, 0.012);
    bump(t + 0.3, 600.0, 0.04);
  }
  const auto iv = ecg::extract_rr(x, rate).intervals_ms;
  detail = fmt("pnn50 [800,860,800,860]=%g [800,840,800]=%g; beats=%g intervals=%g", a.value_or(-1), b.value_or(-1),
               static_cast<double>(beats.size()), static_cast<double>(iv.size()));
  return a == 1.0 && b == 0.0 && iv.size() + 1 == beats.size();
}

bool spectral(std::string& detail) {
  const double rate = 128.0;
  std::vector<double> sine(static_cast<std::size_t>(rate * 10));
  for (std::size_t i = 0; i < sine.size(); ++i) sine[i] = std::sin(2 * std::numbers::pi * 10.0 * static_cast<double>(i) / rate);
  const auto p = dsp::welch_psd(sine, rate);
  const double frac = dsp::band_power(p, 9.0, 11.0 + 1e-9) / dsp::band_power(p, 0.0, 64.0);

  std::mt19937_64 rng(11);
  double worst_parseval = 0.0, worst_partition = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto x = noise(static_cast<std::size_t>(rate * 60), rng, 1.0 + t);
    const auto q = dsp::welch_psd(x, rate);
    const double total = dsp::band_power(q, 0.0, 64.0);
    const double var = dsp::population_std(x) * dsp::population_std(x);
    worst_parseval = std::max(worst_parseval, std::abs(total - var) / var);
    const double parts = dsp::band_power(q, 0, 4) + dsp::band_power(q, 4, 7) + dsp::band_power(q, 7, 13) +
                         dsp::band_power(q, 13, 30) + dsp::band_power(q, 30, 64);
    worst_partition = std::max(worst_partition, std::abs(parts - total) / total);
  }
  detail = fmt("10 Hz share=%.4f (>=0.95); Parseval max rel err=%.4f (<=0.10); partition rel err=%.2g (<=1e-9)",
               frac, worst_parseval, worst_partition);
  return frac >= 0.95 && worst_parseval <= 0.10 && worst_partition <= 1e-9;
}

bool elm_checks(std::string& detail) {
  Matrix X(4, 2);
  X << 0, 0, 0, 1, 1, 0, 1, 1;
  const std::vector<int> y{0, 1, 1, 0};
  const auto xm = elm::elm_train(X, y, 20, 1e-6, 1);
  const double xor_acc = elm::accuracy(elm::elm_predict(xm, X).labels, y);

  double worst_blob = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(500 + seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix B(400, 2);
    std::vector<int> by(400);
    for (int i = 0; i < 400; ++i) {
      by[static_cast<std::size_t>(i)] = i % 2;
      B(i, 0) = g(rng) + (i % 2 ? 3.0 : -3.0);
      B(i, 1) = g(rng);
    }
    const auto m = elm::elm_train(B.topRows(200), {by.begin(), by.begin() + 200}, 100, 1e-3, seed);
    worst_blob = std::min(worst_blob, elm::accuracy(elm::elm_predict(m, B.bottomRows(200)).labels,
                                                    {by.begin() + 200, by.end()}));
  }

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_res = 0.0;
  for (auto [n, L] : {std::pair{200, 50}, std::pair{50, 200}, std::pair{120, 120}}) {
    Matrix H(n, L), T(n, 3);
    for (Eigen::Index i = 0; i < H.size(); ++i) H(i) = u(rng);
    for (Eigen::Index i = 0; i < T.size(); ++i) T(i) = u(rng);
    for (double lambda : {1e-6, 1e-3, 1.0}) {
      const Matrix Bw = elm::solve_output_weights(H, T, lambda);
      const Matrix HtT = H.transpose() * T;
      const Matrix r = (H.transpose() * H + lambda * Matrix::Identity(L, L)) * Bw - HtT;
      worst_res = std::max(worst_res, r.norm() / HtT.norm());
    }
  }

  Matrix probe(300, 2);
  for (Eigen::Index i = 0; i < probe.size(); ++i) probe(i) = 8 * u(rng) - 4;
  Matrix Xc(100, 2);
  std::vector<int> yc(100);
  for (int i = 0; i < 100; ++i) {
    Xc(i, 0) = u(rng);
    Xc(i, 1) = u(rng);
    yc[static_cast<std::size_t>(i)] = Xc(i, 0) + Xc(i, 1) > 1.0 ? 1 : 0;
  }
  const auto m = elm::elm_train(Xc, yc, 150, 1e-3, 9);
  const auto path = fs::temp_directory_path() / "affect_acceptance_elm.json";
  elm::save_model(m, path);
  const auto r = elm::load_model(path);
  fs::remove(path);
  const auto pa = elm::elm_predict(m, probe), pb = elm::elm_predict(r, probe);
  const bool same = pa.labels == pb.labels && pa.scores == pb.scores;

  detail = fmt("XOR acc=%.2f; blob min held-out acc=%.3f (>=0.95); residual=%.2g (<=1e-6); round-trip ", xor_acc,
               worst_blob, worst_res) +
           (same ? "identical" : "differs");
  return xor_acc == 1.0 && worst_blob >= 0.95 && worst_res <= 1e-6 && same;
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

struct Row {
  double accuracy{0}, chance{0};
  std::size_t n_train{0}, n_test{0};
};

bool end_to_end(std::string& detail) {
  const fs::path work = fs::temp_directory_path() / "affect_acceptance_e2e";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string exe = AFFECTPIPE_EXE;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string synth_cmd = "'" + exe + "' synth --subjects 40 --videos 16 --seed 1 --out " +
                                shell_quote(work / "data") + " > " + shell_quote(work / "synth.log") + " 2>&1";
  if (std::system(synth_cmd.c_str()) != 0) {
    detail = "synth failed, see " + (work / "synth.log").string();
    return false;
  }
  nlohmann::json cfg{{"manifest", "data/manifest.json"},
                     {"modalities", {"eeg", "gsr", "face_au"}},
                     {"fusion_groups", nlohmann::json::array({nlohmann::json::array({"eeg", "face_au"})})},
                     {"targets", {"valence"}},
                     {"baseline_mode", "compensated"}};
  text::write_file(work / "cfg.json", cfg.dump(1));
  const std::string run_cmd = "'" + exe + "' run --config " + shell_quote(work / "cfg.json") + " --out " +
                              shell_quote(work / "results") + " > " + shell_quote(work / "run.log") + " 2>&1";
  if (std::system(run_cmd.c_str()) != 0) {
    detail = "run failed, see " + (work / "run.log").string();
    return false;
  }
  const double secs = seconds_since(t0);
  const ResultsTable t = parse_results_csv(text::read_file(work / "results" / "results.csv"));
  std::map<std::string, Row> rows;
  for (const auto& r : t.rows) rows[r.features] = {r.accuracy, r.chance, r.n_train, r.n_test};
  const Row eeg = rows["eeg"], gsr = rows["gsr"], au = rows["face_au"], fused = rows["eeg+face_au"];
  const bool split_ok = t.rows.size() == 4 && eeg.n_train == 512 && eeg.n_test == 128;
  const double best = std::max(eeg.accuracy, au.accuracy);
  std::ostringstream s;
  s << "split " << eeg.n_train << "/" << eeg.n_test
    << fmt("; valence eeg=%.4f (>=0.90) gsr=%.4f (>=0.80) face_au=%.4f eeg+face_au=%.4f", eeg.accuracy, gsr.accuracy,
           au.accuracy, fused.accuracy)
    << fmt(" (>=%.4f); synth+run %.0fs (limit 600s)", best - 0.02, secs);
  detail = s.str();
  fs::remove_all(work);
  return split_ok && eeg.accuracy >= 0.90 && gsr.accuracy >= 0.80 && fused.accuracy >= best - 0.02 && secs < 600.0;
}

bool random_label_null(std::string& detail) {
  synth::LabelPlan plan;
  plan.random_labels = true;
  ExperimentConfig cfg;
  cfg.modalities = {FeatureSet::EEG, FeatureSet::GSR};
  cfg.fusion_groups = {};
  cfg.targets = {Target::Valence};
  cfg.baseline_mode = BaselineMode::Compensated;
  double worst = 0.0;
  std::ostringstream s;
  bool complete = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ResultsTable t = run_experiment(synth::generate_synthetic_dataset(40, 16, 100 + seed, plan), cfg);
    complete = complete && t.rows.size() == 2;
    for (const auto& r : t.rows) {
      worst = std::max(worst, std::abs(r.accuracy - r.chance));
      s << " " << r.features << "=" << fmt("%.3f/%.3f", r.accuracy, r.chance);
    }
  }
  detail = fmt("max |acc - chance| = %.4f (<=0.15) over 5 seeds;", worst) + s.str();
  return complete && worst <= 0.15;
}

bool leakage(std::string& detail) {
  const Dataset d = synth::generate_synthetic_dataset(4, 16, 5);
  ExperimentConfig cfg;
  cfg.fusion_groups = {{FeatureSet::EEG, FeatureSet::FaceAu}};
  cfg.targets = {Target::Valence};
  cfg.baseline_mode = BaselineMode::Compensated;
  cfg.grid = {{100}, {1e-3}};
  const Split split = split_dataset(d, cfg.split_fraction, cfg.split_seed);
  auto fingerprint = [&](const Dataset& ds, const Split& sp) {
    const ExtractedData x = extract_all(ds, cfg, &sp);
    std::vector<std::uint64_t> h;
    for (const auto& p : x.transforms.eeg_pca.per_band) h.push_back(hash_model(p));
    h.push_back(hash_model(x.transforms.face_pca));
    for (const Cell& c : plan_cells(cfg)) {
      const auto m = train_cell(x, c, cfg);
      h.push_back(m ? elm::hash_model(m->elm) : 0);
      if (m) {
        for (const auto& z : m->group_norms) h.push_back(hash_model(z));
      }
    }
    return h;
  };
  const auto base = fingerprint(d, split);
  std::size_t changed = 0;
  for (const auto& victim : split.test) {
    Dataset r = d;
    std::erase_if(r.trials, [&](const TrialRecord& t) { return t.key() == victim; });
    Split s = split;
    std::erase(s.test, victim);
    changed += fingerprint(r, s) != base;
  }
  detail = fmt("removed each of %g test trials one at a time; %g fingerprints (%g hashes each) changed",
               static_cast<double>(split.test.size()), static_cast<double>(changed), static_cast<double>(base.size()));
  return changed == 0;
}

}  // namespace

int main() {
  criterion("feature-widths", feature_widths);
  criterion("baseline-compensation", compensation);
  criterion("conditional-entropy", conditional_entropy);
  criterion("pnn50-twave", pnn50_and_twave);
  criterion("spectral", spectral);
  criterion("elm", elm_checks);
  criterion("end-to-end", end_to_end);
  criterion("random-label-null", random_label_null);
  criterion("leakage-guard", leakage);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
