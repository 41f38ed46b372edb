#include "affect/pipeline.hpp"

#include "affect/ecg_features.hpp"
#include "affect/error.hpp"
#include "affect/face_features.hpp"
#include "affect/gsr_features.hpp"
#include "affect/parallel.hpp"
#include "affect/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

namespace affect::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<FeatureSet, 5> kAllFeatureSets{FeatureSet::EEG, FeatureSet::ECG, FeatureSet::GSR,
                                                    FeatureSet::FaceAu, FeatureSet::FaceEmbed};
constexpr std::array<Target, 6> kAllTargets{Target::Valence, Target::Arousal, Target::Liking,
                                            Target::Dominance, Target::Emotion4, Target::Emotion8};

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for \"") + key + "\": " + j.dump());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<FeatureSet> parse_group(const json& j, const char* key) {
  std::vector<FeatureSet> out;
  for (const auto& s : get_as<std::vector<std::string>>(j, key)) out.push_back(parse_feature_set(s));
  return out;
}

std::pair<std::string, std::string> split_key(const std::string& key) {
  const auto slash = key.find('/');
  if (slash == std::string::npos) throw DataError("bad trial key \"" + key + "\"");
  return {key.substr(0, slash), key.substr(slash + 1)};
}

bool contains(const std::vector<FeatureSet>& v, FeatureSet f) {
  return std::find(v.begin(), v.end(), f) != v.end();
}

// Per-trial modality features before any trained projection.
struct RawTrial {
  std::string key;
  std::optional<FeatureVector> entropy;
  std::optional<eeg::BandEmbeddings> bands;
  std::optional<FeatureVector> ecg;
  std::optional<FeatureVector> gsr;
  std::optional<FeatureVector> au;
  std::optional<std::vector<double>> face_aggregate;
  std::vector<std::string> notes;
};

RawTrial raw_features(const TrialRecord& t, const std::vector<FeatureSet>& modalities,
                      const ExtractionSetup& setup) {
  RawTrial r;
  r.key = t.key();
  auto guard = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const eeg::EmbeddingUnavailable&) {
      throw;
    } catch (const std::exception& e) {
      r.notes.push_back(r.key + ": " + what + " features unavailable: " + e.what());
    }
  };
  const bool want_eeg = contains(modalities, FeatureSet::EEG);
  if (want_eeg && t.eeg) {
    guard("eeg", [&] {
      r.entropy = eeg::eeg_entropy_features(*t.eeg, setup.renderer().layout(), setup.entropy_bins());
      r.bands = eeg::eeg_band_embeddings(*t.eeg, setup.renderer(), setup.embedder(), r.key, setup.topo());
    });
    if (!r.bands) r.entropy.reset();
  }
  if (contains(modalities, FeatureSet::ECG) && t.ecg) {
    guard("ecg", [&] {
      r.ecg = ecg::ecg_features(*t.ecg);
      if (!r.ecg) r.notes.push_back(r.key + ": ecg has fewer than two RR intervals on a lead");
    });
  }
  if (contains(modalities, FeatureSet::GSR) && t.gsr) {
    guard("gsr", [&] { r.gsr = gsr::gsr_features(*t.gsr); });
  }
  if (contains(modalities, FeatureSet::FaceAu) && t.landmarks) {
    guard("face_au", [&] { r.au = face::au_features_trial(*t.landmarks, setup.au_config()); });
  }
  if (contains(modalities, FeatureSet::FaceEmbed) && t.face_embeddings && !t.face_embeddings->empty()) {
    guard("face_embed", [&] { r.face_aggregate = face::aggregate_embeddings(*t.face_embeddings); });
  }
  return r;
}

std::vector<RawTrial> raw_all(const Dataset& d, const std::vector<FeatureSet>& modalities,
                              const ExtractionSetup& setup, int threads) {
  std::vector<RawTrial> raw(d.trials.size());
  parallel_for(d.trials.size(), threads, [&](std::size_t i) { raw[i] = raw_features(d.trials[i], modalities, setup); });
  std::sort(raw.begin(), raw.end(), [](const RawTrial& a, const RawTrial& b) { return a.key < b.key; });
  return raw;
}

Matrix stack(const std::vector<const std::vector<double>*>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0]->size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i]->data(), static_cast<Eigen::Index>(rows[i]->size()));
  }
  return m;
}

PcaModel fit_pca_checked(const std::vector<const std::vector<double>*>& rows, Eigen::Index k, const char* what) {
  if (static_cast<Eigen::Index>(rows.size()) < k + 1) {
    throw DataError(std::string(what) + " PCA needs at least " + std::to_string(k + 1) +
                    " training trials with that modality, have " + std::to_string(rows.size()));
  }
  return pca_fit(stack(rows), k);
}

FittedTransforms fit_from_raw(const std::vector<RawTrial>& raw, const std::set<std::string>& train,
                              const std::vector<FeatureSet>& modalities) {
  FittedTransforms t;
  if (contains(modalities, FeatureSet::EEG)) {
    for (eeg::Band b : eeg::kBands) {
      std::vector<const std::vector<double>*> rows;
      for (const auto& r : raw) {
        if (r.bands && train.count(r.key)) rows.push_back(&(*r.bands)[static_cast<int>(b)]);
      }
      t.eeg_pca.per_band[static_cast<int>(b)] = fit_pca_checked(rows, eeg::kPcaPerBand, "EEG topomap embedding");
    }
  }
  if (contains(modalities, FeatureSet::FaceEmbed)) {
    std::vector<const std::vector<double>*> rows;
    for (const auto& r : raw) {
      if (r.face_aggregate && train.count(r.key)) rows.push_back(&*r.face_aggregate);
    }
    t.face_pca = fit_pca_checked(rows, face::kEmbedPca, "face embedding");
  }
  return t;
}

FeatureMatrix matrix_from_raw(const std::vector<RawTrial>& raw, FeatureSet m, const FittedTransforms& t) {
  FeatureMatrix fm;
  std::vector<FeatureVector> rows;
  for (const auto& r : raw) {
    std::optional<FeatureVector> fv;
    switch (m) {
      case FeatureSet::EEG:
        if (r.entropy && r.bands) {
          fv = *r.entropy;
          fv->append(eeg::eeg_embedding_features(*r.bands, t.eeg_pca));
        }
        break;
      case FeatureSet::ECG: fv = r.ecg; break;
      case FeatureSet::GSR: fv = r.gsr; break;
      case FeatureSet::FaceAu: fv = r.au; break;
      case FeatureSet::FaceEmbed:
        if (r.face_aggregate) fv = face::face_embedding_features(*r.face_aggregate, t.face_pca);
        break;
    }
    if (!fv) {
      fm.excluded.push_back(r.key);
      continue;
    }
    if (fm.names.empty()) fm.names = fv->names;
    fm.ids.push_back(r.key);
    rows.push_back(std::move(*fv));
  }
  fm.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(fm.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < fm.names.size(); ++c) {
      fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i].values[c];
    }
  }
  return fm;
}

struct Design {
  Matrix x_train, x_test;
  std::vector<int> y_train, y_test;
};

Design design_for(const ExtractedData& x, const FeatureMatrix& fm, const Cell& cell) {
  const std::set<std::string> train(x.split.train.begin(), x.split.train.end());
  const std::set<std::string> test(x.split.test.begin(), x.split.test.end());
  std::vector<Eigen::Index> tr, te;
  for (std::size_t i = 0; i < fm.ids.size(); ++i) {
    const auto& id = fm.ids[i];
    if (!x.ratings.count(id)) continue;
    if (train.count(id)) tr.push_back(static_cast<Eigen::Index>(i));
    else if (test.count(id)) te.push_back(static_cast<Eigen::Index>(i));
  }
  Design d;
  auto fill = [&](const std::vector<Eigen::Index>& idx, Matrix& X, std::vector<int>& y) {
    X.resize(static_cast<Eigen::Index>(idx.size()), fm.values.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      X.row(static_cast<Eigen::Index>(r)) = fm.values.row(idx[r]);
      y.push_back(target_label(cell.target, x.ratings.at(fm.ids[static_cast<std::size_t>(idx[r])]), cell.compensated));
    }
  };
  fill(tr, d.x_train, d.y_train);
  fill(te, d.x_test, d.y_test);
  return d;
}

std::vector<const FeatureMatrix*> groups_for(const ExtractedData& x, const Cell& cell, std::string* why) {
  std::vector<const FeatureMatrix*> out;
  for (FeatureSet f : cell.features) {
    const auto it = x.features.find(f);
    if (it == x.features.end()) {
      if (why) *why = std::string("modality ") + feature_set_name(f) + " was not extracted";
      return {};
    }
    out.push_back(&it->second);
  }
  return out;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

const char* feature_set_name(FeatureSet f) {
  switch (f) {
    case FeatureSet::EEG: return "eeg";
    case FeatureSet::ECG: return "ecg";
    case FeatureSet::GSR: return "gsr";
    case FeatureSet::FaceAu: return "face_au";
    case FeatureSet::FaceEmbed: return "face_embed";
  }
  return "?";
}

const char* baseline_mode_name(BaselineMode m) {
  switch (m) {
    case BaselineMode::Raw: return "raw";
    case BaselineMode::Compensated: return "compensated";
    case BaselineMode::Both: return "both";
  }
  return "?";
}

const char* target_name(Target t) {
  switch (t) {
    case Target::Valence: return "valence";
    case Target::Arousal: return "arousal";
    case Target::Liking: return "liking";
    case Target::Dominance: return "dominance";
    case Target::Emotion4: return "emotion4";
    case Target::Emotion8: return "emotion8";
  }
  return "?";
}

FeatureSet parse_feature_set(const std::string& s) {
  for (FeatureSet f : kAllFeatureSets) {
    if (s == feature_set_name(f)) return f;
  }
  throw ConfigError("unknown modality \"" + s + "\" (expected eeg, ecg, gsr, face_au or face_embed)");
}

BaselineMode parse_baseline_mode(const std::string& s) {
  for (BaselineMode m : {BaselineMode::Raw, BaselineMode::Compensated, BaselineMode::Both}) {
    if (s == baseline_mode_name(m)) return m;
  }
  throw ConfigError("unknown baseline_mode \"" + s + "\" (expected raw, compensated or both)");
}

Target parse_target(const std::string& s) {
  for (Target t : kAllTargets) {
    if (s == target_name(t)) return t;
  }
  throw ConfigError("unknown target \"" + s +
                    "\" (expected valence, arousal, liking, dominance, emotion4 or emotion8)");
}

std::string features_label(const std::vector<FeatureSet>& group) {
  std::string out;
  for (FeatureSet f : group) {
    if (!out.empty()) out += "+";
    out += feature_set_name(f);
  }
  return out;
}

void validate_config(const ExperimentConfig& c) {
  if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie strictly between 0 and 1");
  }
  if (c.modalities.empty() && c.fusion_groups.empty()) throw ConfigError("no modalities or fusion groups");
  if (std::set<FeatureSet>(c.modalities.begin(), c.modalities.end()).size() != c.modalities.size()) {
    throw ConfigError("modalities contain duplicates");
  }
  for (const auto& g : c.fusion_groups) {
    if (g.size() < 2) throw ConfigError("fusion group must list at least two modalities");
    if (std::set<FeatureSet>(g.begin(), g.end()).size() != g.size()) {
      throw ConfigError("fusion group " + features_label(g) + " repeats a modality");
    }
  }
  if (c.targets.empty()) throw ConfigError("targets must not be empty");
  if (c.grid.hidden.empty() || c.grid.lambdas.empty()) throw ConfigError("elm grid must not be empty");
  for (auto h : c.grid.hidden) {
    if (h < 1) throw ConfigError("elm hidden sizes must be >= 1");
  }
  for (double l : c.grid.lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("elm lambdas must be finite and >= 0");
  }
  if (c.folds < 2) throw ConfigError("elm folds must be >= 2");
  if (c.entropy_bins < 2) throw ConfigError("entropy_bins must be >= 2");
  if (c.embedder != "stub64" && c.embedder != "file") {
    throw ConfigError("embedder kind must be \"stub64\" or \"file\"");
  }
  if (c.embedder == "file" && c.embedder_dir.empty()) throw ConfigError("embedder kind \"file\" needs a dir");
  if (c.threads < 0) throw ConfigError("threads must be >= 0 (0 = all cores)");
}

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kKeys{"manifest",     "split_fraction", "split_seed",  "modalities",
                                           "fusion_groups", "baseline_mode", "targets",     "elm",
                                           "embedder",     "layout_csv",     "au_config_csv", "entropy_bins",
                                           "topo_log_power", "threads",      "check_duration_range"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw ConfigError("unknown config key \"" + k + "\"");
  }
  ExperimentConfig c;
  if (j.contains("manifest")) c.manifest = resolve(base_dir, get_as<std::string>(j["manifest"], "manifest"));
  if (j.contains("split_fraction")) c.split_fraction = get_as<double>(j["split_fraction"], "split_fraction");
  if (j.contains("split_seed")) c.split_seed = get_as<std::uint64_t>(j["split_seed"], "split_seed");
  if (j.contains("modalities")) c.modalities = parse_group(j["modalities"], "modalities");
  if (j.contains("fusion_groups")) {
    c.fusion_groups.clear();
    if (!j["fusion_groups"].is_array()) throw ConfigError("fusion_groups must be a list of lists");
    for (const auto& g : j["fusion_groups"]) c.fusion_groups.push_back(parse_group(g, "fusion_groups"));
  }
  if (j.contains("baseline_mode")) {
    c.baseline_mode = parse_baseline_mode(get_as<std::string>(j["baseline_mode"], "baseline_mode"));
  }
  if (j.contains("targets")) {
    c.targets.clear();
    for (const auto& s : get_as<std::vector<std::string>>(j["targets"], "targets")) c.targets.push_back(parse_target(s));
  }
  if (j.contains("elm")) {
    const auto& e = j["elm"];
    if (!e.is_object()) throw ConfigError("elm must be an object");
    for (const auto& [k, v] : e.items()) {
      if (k != "hidden" && k != "lambda" && k != "folds" && k != "seed") throw ConfigError("unknown elm key \"" + k + "\"");
    }
    if (e.contains("hidden")) c.grid.hidden = get_as<std::vector<Eigen::Index>>(e["hidden"], "elm.hidden");
    if (e.contains("lambda")) c.grid.lambdas = get_as<std::vector<double>>(e["lambda"], "elm.lambda");
    if (e.contains("folds")) c.folds = get_as<int>(e["folds"], "elm.folds");
    if (e.contains("seed")) c.elm_seed = get_as<std::uint64_t>(e["seed"], "elm.seed");
  }
  if (j.contains("embedder")) {
    const auto& e = j["embedder"];
    if (!e.is_object()) throw ConfigError("embedder must be an object");
    for (const auto& [k, v] : e.items()) {
      if (k != "kind" && k != "dir") throw ConfigError("unknown embedder key \"" + k + "\"");
    }
    if (e.contains("kind")) c.embedder = get_as<std::string>(e["kind"], "embedder.kind");
    if (e.contains("dir")) c.embedder_dir = resolve(base_dir, get_as<std::string>(e["dir"], "embedder.dir"));
  }
  if (j.contains("layout_csv")) c.layout_csv = resolve(base_dir, get_as<std::string>(j["layout_csv"], "layout_csv"));
  if (j.contains("au_config_csv")) {
    c.au_config_csv = resolve(base_dir, get_as<std::string>(j["au_config_csv"], "au_config_csv"));
  }
  if (j.contains("entropy_bins")) c.entropy_bins = get_as<int>(j["entropy_bins"], "entropy_bins");
  if (j.contains("topo_log_power")) c.topo_log_power = get_as<bool>(j["topo_log_power"], "topo_log_power");
  if (j.contains("threads")) c.threads = get_as<int>(j["threads"], "threads");
  if (j.contains("check_duration_range")) {
    c.check_duration_range = get_as<bool>(j["check_duration_range"], "check_duration_range");
  }
  validate_config(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  auto names = [](const std::vector<FeatureSet>& g) {
    std::vector<std::string> out;
    for (FeatureSet f : g) out.emplace_back(feature_set_name(f));
    return out;
  };
  json groups = json::array();
  for (const auto& g : c.fusion_groups) groups.push_back(names(g));
  std::vector<std::string> targets;
  for (Target t : c.targets) targets.emplace_back(target_name(t));
  json j{{"manifest", c.manifest.string()},
         {"split_fraction", c.split_fraction},
         {"split_seed", c.split_seed},
         {"modalities", names(c.modalities)},
         {"fusion_groups", groups},
         {"baseline_mode", baseline_mode_name(c.baseline_mode)},
         {"targets", targets},
         {"elm", {{"hidden", c.grid.hidden}, {"lambda", c.grid.lambdas}, {"folds", c.folds}, {"seed", c.elm_seed}}},
         {"embedder", {{"kind", c.embedder}, {"dir", c.embedder_dir.string()}}},
         {"entropy_bins", c.entropy_bins},
         {"topo_log_power", c.topo_log_power},
         {"threads", c.threads},
         {"check_duration_range", c.check_duration_range}};
  if (!c.layout_csv.empty()) j["layout_csv"] = c.layout_csv.string();
  if (!c.au_config_csv.empty()) j["au_config_csv"] = c.au_config_csv.string();
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j, path.parent_path());
}

Split split_dataset(const Dataset& d, double fraction, std::uint64_t seed) {
  if (d.trials.size() < 2) throw DataError("split: need at least 2 trials, have " + std::to_string(d.trials.size()));
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split_fraction must lie strictly between 0 and 1");
  std::vector<std::string> keys;
  keys.reserve(d.trials.size());
  for (const auto& t : d.trials) keys.push_back(t.key());
  std::mt19937_64 gen(seed);
  std::shuffle(keys.begin(), keys.end(), gen);
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(keys.size()) * fraction));
  if (n_train == 0 || n_train == keys.size()) {
    throw DataError("split: fraction " + text::format_double(fraction) + " leaves an empty partition for " +
                    std::to_string(keys.size()) + " trials");
  }
  Split s;
  s.train.assign(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(keys.begin() + static_cast<std::ptrdiff_t>(n_train), keys.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

ExtractionSetup::ExtractionSetup(const ExperimentConfig& cfg)
    : renderer_(cfg.layout_csv.empty() ? eeg::ElectrodeLayout::default_14() : eeg::read_layout_csv(cfg.layout_csv)),
      embedder_(eeg::make_embedder(cfg.embedder, cfg.embedder_dir)),
      au_(cfg.au_config_csv.empty() ? face::AuFeatureConfig::default_30() : face::read_au_config_csv(cfg.au_config_csv)),
      bins_(cfg.entropy_bins) {
  topo_.log_power = cfg.topo_log_power;
}

FittedTransforms fit_transforms(const Dataset& d, const std::vector<std::string>& train_ids,
                                const std::vector<FeatureSet>& modalities, const ExtractionSetup& setup,
                                int threads) {
  const auto raw = raw_all(d, modalities, setup, threads);
  return fit_from_raw(raw, {train_ids.begin(), train_ids.end()}, modalities);
}

FeatureMatrix extract_features(const Dataset& d, FeatureSet modality, const FittedTransforms& t,
                               const ExtractionSetup& setup, int threads) {
  return matrix_from_raw(raw_all(d, {modality}, setup, threads), modality, t);
}

std::vector<FeatureSet> needed_modalities(const ExperimentConfig& cfg) {
  std::vector<FeatureSet> out = cfg.modalities;
  for (const auto& g : cfg.fusion_groups) {
    for (FeatureSet f : g) {
      if (!contains(out, f)) out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ExtractedData extract_all(const Dataset& d, const ExperimentConfig& cfg, const Split* split) {
  validate_config(cfg);
  ExtractedData x;
  x.split = split ? *split : split_dataset(d, cfg.split_fraction, cfg.split_seed);
  for (const auto& t : d.trials) x.ratings[t.key()] = {t.ratings_pre, t.ratings_post};
  const ExtractionSetup setup(cfg);
  const auto modalities = needed_modalities(cfg);
  const auto raw = raw_all(d, modalities, setup, cfg.threads);
  for (const auto& r : raw) x.warnings.insert(x.warnings.end(), r.notes.begin(), r.notes.end());
  x.transforms = fit_from_raw(raw, {x.split.train.begin(), x.split.train.end()}, modalities);
  for (FeatureSet f : modalities) x.features[f] = matrix_from_raw(raw, f, x.transforms);
  return x;
}

FeatureMatrix apply_fusion(const std::vector<const FeatureMatrix*>& groups, const std::vector<ZScoreModel>& norms) {
  if (groups.size() < 2) throw std::invalid_argument("fuse: need at least two feature groups");
  if (norms.size() != groups.size()) throw std::invalid_argument("fuse: one normaliser per group required");
  std::vector<std::string> common = groups[0]->ids;
  for (std::size_t g = 1; g < groups.size(); ++g) {
    std::vector<std::string> next;
    std::set_intersection(common.begin(), common.end(), groups[g]->ids.begin(), groups[g]->ids.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) {
    std::string names;
    for (const auto* g : groups) names += (names.empty() ? "" : ", ") + std::to_string(g->ids.size()) + " ids";
    throw DataError("fuse: the feature groups share no trial ids (" + names + "); fusion needs trials with every modality");
  }
  FeatureMatrix out;
  out.ids = common;
  Eigen::Index width = 0;
  for (const auto* g : groups) width += g->width();
  out.values.resize(static_cast<Eigen::Index>(common.size()), width);
  Eigen::Index col = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& fm = *groups[g];
    if (norms[g].dim() != fm.width()) throw std::invalid_argument("fuse: normaliser width mismatch");
    Matrix part(static_cast<Eigen::Index>(common.size()), fm.width());
    std::size_t src = 0;
    for (std::size_t r = 0; r < common.size(); ++r) {
      while (fm.ids[src] != common[r]) ++src;
      part.row(static_cast<Eigen::Index>(r)) = fm.values.row(static_cast<Eigen::Index>(src));
    }
    out.values.middleCols(col, fm.width()) = zscore_apply(norms[g], part);
    col += fm.width();
    out.names.insert(out.names.end(), fm.names.begin(), fm.names.end());
  }
  return out;
}

FusedMatrix fuse(const std::vector<const FeatureMatrix*>& groups, const std::vector<std::string>& train_ids) {
  if (groups.size() < 2) throw std::invalid_argument("fuse: need at least two feature groups");
  std::vector<std::string> common = groups[0]->ids;
  for (std::size_t g = 1; g < groups.size(); ++g) {
    std::vector<std::string> next;
    std::set_intersection(common.begin(), common.end(), groups[g]->ids.begin(), groups[g]->ids.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  const std::set<std::string> train(train_ids.begin(), train_ids.end());
  std::vector<std::string> fit_ids;
  for (const auto& id : common) {
    if (train.count(id)) fit_ids.push_back(id);
  }
  FusedMatrix f;
  if (fit_ids.empty()) {
    apply_fusion(groups, std::vector<ZScoreModel>(groups.size()));  // throws the no-common-ids error first
    throw DataError("fuse: no training trial has every modality of the group");
  }
  for (const auto* g : groups) {
    Matrix part(static_cast<Eigen::Index>(fit_ids.size()), g->width());
    std::size_t src = 0;
    for (std::size_t r = 0; r < fit_ids.size(); ++r) {
      while (g->ids[src] != fit_ids[r]) ++src;
      part.row(static_cast<Eigen::Index>(r)) = g->values.row(static_cast<Eigen::Index>(src));
    }
    f.group_norms.push_back(zscore_fit(part));
  }
  f.matrix = apply_fusion(groups, f.group_norms);
  return f;
}

int target_label(Target t, const TrialRatings& r, bool compensated) {
  const LabelSet l = make_labels(r.pre, r.post, compensated);
  switch (t) {
    case Target::Valence: return static_cast<int>(l.valence);
    case Target::Arousal: return static_cast<int>(l.arousal);
    case Target::Liking: return static_cast<int>(l.liking);
    case Target::Dominance: return static_cast<int>(l.dominance);
    case Target::Emotion4: return static_cast<int>(l.quadrant);
    case Target::Emotion8: return static_cast<int>(l.octant);
  }
  return 0;
}

std::vector<Cell> plan_cells(const ExperimentConfig& cfg) {
  std::vector<std::vector<FeatureSet>> sets;
  for (FeatureSet f : cfg.modalities) sets.push_back({f});
  for (const auto& g : cfg.fusion_groups) sets.push_back(g);
  std::vector<bool> modes;
  if (cfg.baseline_mode != BaselineMode::Compensated) modes.push_back(false);
  if (cfg.baseline_mode != BaselineMode::Raw) modes.push_back(true);
  std::vector<Cell> cells;
  for (Target t : cfg.targets) {
    for (const auto& s : sets) {
      for (bool comp : modes) cells.push_back({t, s, comp});
    }
  }
  return cells;
}

std::optional<CellModel> train_cell(const ExtractedData& x, const Cell& cell, const ExperimentConfig& cfg,
                                    std::string* skip_reason) {
  auto skip = [&](std::string why) -> std::optional<CellModel> {
    if (skip_reason) *skip_reason = std::move(why);
    return std::nullopt;
  };
  std::string why;
  const auto groups = groups_for(x, cell, &why);
  if (groups.empty()) return skip(why);

  CellModel m;
  m.cell = cell;
  Design d;
  if (groups.size() == 1) {
    d = design_for(x, *groups[0], cell);
  } else {
    FusedMatrix fused = fuse(groups, x.split.train);
    m.group_norms = std::move(fused.group_norms);
    d = design_for(x, fused.matrix, cell);
  }
  if (d.y_train.size() < 2) return skip("fewer than two training trials");
  if (std::set<int>(d.y_train.begin(), d.y_train.end()).size() < 2) return skip("single class in training labels");

  const int k = std::min<int>(cfg.folds, static_cast<int>(d.y_train.size()));
  m.cv = elm::cross_validate(d.x_train, d.y_train, cfg.grid, k, cfg.elm_seed);
  m.elm = elm::elm_train(d.x_train, d.y_train, m.cv.chosen_hidden, m.cv.chosen_lambda, cfg.elm_seed);
  m.n_train = d.y_train.size();
  return m;
}

std::optional<ResultRow> evaluate_cell(const ExtractedData& x, const CellModel& m, std::string* skip_reason) {
  std::string why;
  const auto groups = groups_for(x, m.cell, &why);
  if (groups.empty()) {
    if (skip_reason) *skip_reason = why;
    return std::nullopt;
  }
  const Design d = groups.size() == 1 ? design_for(x, *groups[0], m.cell)
                                      : design_for(x, apply_fusion(groups, m.group_norms), m.cell);
  if (d.y_test.empty()) {
    if (skip_reason) *skip_reason = "no test trials with these features";
    return std::nullopt;
  }
  const auto pred = elm::elm_predict(m.elm, d.x_test);
  std::map<int, std::size_t> freq;
  for (int y : d.y_test) ++freq[y];
  std::size_t majority = 0;
  for (const auto& [c, n] : freq) majority = std::max(majority, n);

  ResultRow r;
  r.target = target_name(m.cell.target);
  r.features = m.cell.features_name();
  r.baseline_mode = m.cell.compensated ? "compensated" : "raw";
  r.accuracy = elm::accuracy(pred.labels, d.y_test);
  r.chance = static_cast<double>(majority) / static_cast<double>(d.y_test.size());
  r.n_train = m.n_train;
  r.n_test = d.y_test.size();
  r.hidden = m.elm.hidden_dim;
  r.lambda = m.elm.ridge_lambda;
  r.cv_accuracy = m.cv.mean_accuracy;
  return r;
}

namespace {

std::string cell_tag(const Cell& c) {
  return std::string(target_name(c.target)) + "/" + c.features_name() + "/" + (c.compensated ? "compensated" : "raw");
}

}  // namespace

ResultsTable run_experiment(const Dataset& d, const ExperimentConfig& cfg, const Split* split) {
  const ExtractedData x = extract_all(d, cfg, split);
  const auto cells = plan_cells(cfg);
  std::vector<std::optional<ResultRow>> rows(cells.size());
  std::vector<std::vector<std::string>> notes(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    std::string why;
    std::optional<CellModel> m;
    try {
      m = train_cell(x, cells[i], cfg, &why);
    } catch (const DataError& e) {
      why = e.what();
    }
    if (!m) {
      notes[i].push_back(cell_tag(cells[i]) + " skipped: " + why);
      return;
    }
    for (const auto& w : m->cv.warnings) notes[i].push_back(cell_tag(cells[i]) + ": " + w);
    rows[i] = evaluate_cell(x, *m, &why);
    if (!rows[i]) notes[i].push_back(cell_tag(cells[i]) + " skipped: " + why);
  });
  ResultsTable t;
  t.warnings = x.warnings;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    t.warnings.insert(t.warnings.end(), notes[i].begin(), notes[i].end());
    if (rows[i]) t.rows.push_back(*rows[i]);
  }
  return t;
}

Dataset load_dataset(const ExperimentConfig& cfg, LoadReport* report) {
  if (cfg.manifest.empty()) throw ConfigError("config: manifest path is required");
  if (!fs::exists(cfg.manifest)) throw DataError("manifest not found: " + cfg.manifest.string());
  LoadOptions opts;
  opts.threads = cfg.threads;
  opts.validation.check_duration_range = cfg.check_duration_range;
  return load_manifest(cfg.manifest, opts, report);
}

ResultsTable run_experiment(const ExperimentConfig& cfg) {
  LoadReport rep;
  const Dataset d = load_dataset(cfg, &rep);
  ResultsTable t = run_experiment(d, cfg);
  std::vector<std::string> w = rep.warnings;
  for (const auto& r : rep.rejected) w.push_back("rejected " + r);
  t.warnings.insert(t.warnings.begin(), w.begin(), w.end());
  return t;
}

std::string results_csv(const ResultsTable& r) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& row : r.rows) {
    out += row.target + "," + row.features + "," + row.baseline_mode + ",";
    text::append_double(out, row.accuracy);
    out += ",";
    text::append_double(out, row.chance);
    out += "," + std::to_string(row.n_train) + "," + std::to_string(row.n_test) + "\n";
  }
  return out;
}

ResultsTable parse_results_csv(const std::string& csv) {
  ResultsTable t;
  text::LineReader lines(csv);
  std::string_view line;
  if (!lines.next(line) || text::trim(line) != kResultsHeader) {
    throw DataError(std::string("results CSV: expected header \"") + kResultsHeader + "\"");
  }
  while (lines.next(line)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    const std::string ctx = "results CSV line " + std::to_string(lines.line_number());
    if (f.size() != 7) throw DataError(ctx + ": expected 7 fields");
    ResultRow r;
    r.target = std::string(f[0]);
    r.features = std::string(f[1]);
    r.baseline_mode = std::string(f[2]);
    r.accuracy = text::parse_double(f[3], ctx);
    r.chance = text::parse_double(f[4], ctx);
    const double ntr = text::parse_double(f[5], ctx), nte = text::parse_double(f[6], ctx);
    if (ntr < 0 || nte < 1 || ntr != std::floor(ntr) || nte != std::floor(nte)) {
      throw DataError(ctx + ": bad trial counts");
    }
    r.n_train = static_cast<std::size_t>(ntr);
    r.n_test = static_cast<std::size_t>(nte);
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::string results_text(const ResultsTable& r) {
  // Grouped per target like the accuracy tables: one line per feature set,
  // raw and baseline-compensated side by side.
  std::vector<std::string> targets;
  for (const auto& row : r.rows) {
    if (std::find(targets.begin(), targets.end(), row.target) == targets.end()) targets.push_back(row.target);
  }
  std::ostringstream os;
  os << "Classification accuracy on the held-out split (chance = majority class rate in test)\n";
  if (r.rows.empty()) os << "\n(no results)\n";
  for (const auto& target : targets) {
    std::vector<std::string> feats;
    for (const auto& row : r.rows) {
      if (row.target == target && std::find(feats.begin(), feats.end(), row.features) == feats.end()) {
        feats.push_back(row.features);
      }
    }
    std::size_t w = 8;
    for (const auto& f : feats) w = std::max(w, f.size());
    char buf[256];
    os << "\nTarget: " << target << "\n";
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %11s  %8s  %7s  %6s\n", static_cast<int>(w), "features", "raw",
                  "chance", "compensated", "chance", "n_train", "n_test");
    os << buf;
    for (const auto& f : feats) {
      const ResultRow* raw = nullptr;
      const ResultRow* comp = nullptr;
      for (const auto& row : r.rows) {
        if (row.target != target || row.features != f) continue;
        (row.baseline_mode == "raw" ? raw : comp) = &row;
      }
      const ResultRow* any = comp ? comp : raw;
      std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %11s  %8s  %7zu  %6zu\n", static_cast<int>(w), f.c_str(),
                    raw ? fmt4(raw->accuracy).c_str() : "-", raw ? fmt4(raw->chance).c_str() : "-",
                    comp ? fmt4(comp->accuracy).c_str() : "-", comp ? fmt4(comp->chance).c_str() : "-",
                    any->n_train, any->n_test);
      os << buf;
    }
  }
  return os.str();
}

void emit_report(const ResultsTable& r, const fs::path& dir) {
  fs::create_directories(dir);
  text::write_file(dir / "results.csv", results_csv(r));
  text::write_file(dir / "results.txt", results_text(r));
}

namespace {

const char* kRatingCols[] = {"valence_pre", "arousal_pre", "liking_pre", "dominance_pre",
                             "valence_post", "arousal_post", "liking_post", "dominance_post"};

std::array<double*, 8> rating_fields(TrialRatings& r) {
  return {&r.pre.valence, &r.pre.arousal, &r.pre.liking, &r.pre.dominance,
          &r.post.valence, &r.post.arousal, &r.post.liking, &r.post.dominance};
}

std::string split_of(const std::string& key, const std::set<std::string>& train, const std::set<std::string>& test) {
  if (train.count(key)) return "train";
  if (test.count(key)) return "test";
  return "none";
}

}  // namespace

void write_extracted(const ExtractedData& x, const fs::path& dir) {
  fs::create_directories(dir);
  const std::set<std::string> train(x.split.train.begin(), x.split.train.end());
  const std::set<std::string> test(x.split.test.begin(), x.split.test.end());

  json excluded = json::object();
  for (const auto& [f, fm] : x.features) excluded[feature_set_name(f)] = fm.excluded;
  text::write_file(dir / "split.json", json{{"train", x.split.train},
                                            {"test", x.split.test},
                                            {"excluded", excluded},
                                            {"warnings", x.warnings}}
                                           .dump(1) +
                                           "\n");

  std::string rc = "subject_id,video_id,split";
  for (const char* c : kRatingCols) rc += std::string(",") + c;
  rc += "\n";
  for (const auto& [key, r] : x.ratings) {
    const auto [s, v] = split_key(key);
    rc += s + "," + v + "," + split_of(key, train, test);
    TrialRatings copy = r;
    for (double* p : rating_fields(copy)) {
      rc += ",";
      text::append_double(rc, *p);
    }
    rc += "\n";
  }
  text::write_file(dir / "ratings.csv", rc);

  json tj = json::object();
  if (x.transforms.eeg_pca.fitted()) {
    tj["eeg_pca"] = json::array();
    for (const auto& p : x.transforms.eeg_pca.per_band) tj["eeg_pca"].push_back(p);
  }
  if (x.transforms.face_pca.fitted()) tj["face_pca"] = x.transforms.face_pca;
  text::write_file(dir / "transforms.json", tj.dump() + "\n");

  for (const auto& [f, fm] : x.features) {
    std::string out = "subject_id,video_id,split";
    for (const auto& n : fm.names) out += "," + n;
    out += "\n";
    for (std::size_t i = 0; i < fm.ids.size(); ++i) {
      const auto [s, v] = split_key(fm.ids[i]);
      out += s + "," + v + "," + split_of(fm.ids[i], train, test);
      for (Eigen::Index c = 0; c < fm.values.cols(); ++c) {
        out += ",";
        text::append_double(out, fm.values(static_cast<Eigen::Index>(i), c));
      }
      out += "\n";
    }
    text::write_file(dir / (std::string("features_") + feature_set_name(f) + ".csv"), out);
  }
}

ExtractedData read_extracted(const fs::path& dir) {
  ExtractedData x;
  json sj;
  try {
    sj = json::parse(text::read_file(dir / "split.json"));
    x.split.train = sj.at("train").get<std::vector<std::string>>();
    x.split.test = sj.at("test").get<std::vector<std::string>>();
    if (sj.contains("warnings")) x.warnings = sj.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError("split.json: " + std::string(e.what()));
  }

  {
    const std::string buf = text::read_file(dir / "ratings.csv");
    text::LineReader lines(buf);
    std::string_view line;
    lines.next(line);
    while (lines.next(line)) {
      if (text::trim(line).empty()) continue;
      const auto f = text::split(line);
      const std::string ctx = "ratings.csv:" + std::to_string(lines.line_number());
      if (f.size() != 11) throw DataError(ctx + ": expected 11 fields");
      TrialRatings r;
      auto fields = rating_fields(r);
      for (std::size_t i = 0; i < 8; ++i) *fields[i] = text::parse_double(f[3 + i], ctx);
      x.ratings[std::string(f[0]) + "/" + std::string(f[1])] = r;
    }
  }

  try {
    const json tj = json::parse(text::read_file(dir / "transforms.json"));
    if (tj.contains("eeg_pca")) {
      for (std::size_t b = 0; b < 3; ++b) x.transforms.eeg_pca.per_band[b] = tj.at("eeg_pca").at(b).get<PcaModel>();
    }
    if (tj.contains("face_pca")) x.transforms.face_pca = tj.at("face_pca").get<PcaModel>();
  } catch (const json::exception& e) {
    throw DataError("transforms.json: " + std::string(e.what()));
  }

  for (FeatureSet f : kAllFeatureSets) {
    const fs::path p = dir / (std::string("features_") + feature_set_name(f) + ".csv");
    if (!fs::exists(p)) continue;
    FeatureMatrix fm;
    const std::string buf = text::read_file(p);
    text::LineReader lines(buf);
    std::string_view line;
    if (!lines.next(line)) throw DataError(p.filename().string() + ": empty file");
    const auto header = text::split(line);
    if (header.size() < 4 || header[0] != "subject_id" || header[1] != "video_id" || header[2] != "split") {
      throw DataError(p.filename().string() + ": expected header subject_id,video_id,split,<features>");
    }
    for (std::size_t i = 3; i < header.size(); ++i) fm.names.emplace_back(header[i]);
    std::vector<double> flat;
    while (lines.next(line)) {
      if (text::trim(line).empty()) continue;
      const auto fields = text::split(line);
      const std::string ctx = p.filename().string() + ":" + std::to_string(lines.line_number());
      if (fields.size() != header.size()) throw DataError(ctx + ": field count differs from header");
      fm.ids.push_back(std::string(fields[0]) + "/" + std::string(fields[1]));
      for (std::size_t i = 3; i < fields.size(); ++i) flat.push_back(text::parse_double(fields[i], ctx));
    }
    if (!std::is_sorted(fm.ids.begin(), fm.ids.end())) throw DataError(p.filename().string() + ": rows not sorted by id");
    fm.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), static_cast<Eigen::Index>(fm.ids.size()), static_cast<Eigen::Index>(fm.names.size()));
    if (sj.contains("excluded") && sj["excluded"].contains(feature_set_name(f))) {
      fm.excluded = sj["excluded"][feature_set_name(f)].get<std::vector<std::string>>();
    }
    x.features[f] = std::move(fm);
  }
  return x;
}

void to_json(json& j, const CellModel& m) {
  std::vector<std::string> feats;
  for (FeatureSet f : m.cell.features) feats.emplace_back(feature_set_name(f));
  json grid = json::array();
  for (const auto& g : m.cv.grid) grid.push_back({{"hidden", g.hidden}, {"lambda", g.lambda}, {"mean_accuracy", g.mean_accuracy}});
  j = json{{"target", target_name(m.cell.target)},
           {"features", feats},
           {"baseline_mode", m.cell.compensated ? "compensated" : "raw"},
           {"group_norms", m.group_norms},
           {"n_train", m.n_train},
           {"cv",
            {{"mean_accuracy", m.cv.mean_accuracy},
             {"fold_accuracies", m.cv.fold_accuracies},
             {"chosen_hidden", m.cv.chosen_hidden},
             {"chosen_lambda", m.cv.chosen_lambda},
             {"stratified", m.cv.stratified},
             {"grid", grid},
             {"warnings", m.cv.warnings}}},
           {"elm", m.elm}};
}

void from_json(const json& j, CellModel& m) {
  try {
    m.cell.target = parse_target(j.at("target").get<std::string>());
    m.cell.features.clear();
    for (const auto& s : j.at("features").get<std::vector<std::string>>()) m.cell.features.push_back(parse_feature_set(s));
    m.cell.compensated = parse_baseline_mode(j.at("baseline_mode").get<std::string>()) == BaselineMode::Compensated;
    m.group_norms = j.at("group_norms").get<std::vector<ZScoreModel>>();
    m.n_train = j.at("n_train").get<std::size_t>();
    const auto& cv = j.at("cv");
    m.cv.mean_accuracy = cv.at("mean_accuracy").get<double>();
    m.cv.fold_accuracies = cv.at("fold_accuracies").get<std::vector<double>>();
    m.cv.chosen_hidden = cv.at("chosen_hidden").get<Eigen::Index>();
    m.cv.chosen_lambda = cv.at("chosen_lambda").get<double>();
    m.cv.stratified = cv.at("stratified").get<bool>();
    m.cv.warnings = cv.at("warnings").get<std::vector<std::string>>();
    m.cv.grid.clear();
    for (const auto& g : cv.at("grid")) {
      m.cv.grid.push_back({g.at("hidden").get<Eigen::Index>(), g.at("lambda").get<double>(),
                           g.at("mean_accuracy").get<double>()});
    }
    m.elm = j.at("elm").get<elm::ElmModel>();
  } catch (const json::exception& e) {
    throw DataError(std::string("cell model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("cell model: ") + e.what());
  }
}

std::string cell_file_name(const Cell& c) {
  return std::string(target_name(c.target)) + "__" + c.features_name() + "__" +
         (c.compensated ? "compensated" : "raw") + ".json";
}

void save_cell_models(const std::vector<CellModel>& models, const fs::path& dir) {
  fs::create_directories(dir);
  json index = json::array();
  for (const auto& m : models) {
    const std::string name = cell_file_name(m.cell);
    text::write_file(dir / name, json(m).dump() + "\n");
    index.push_back(name);
  }
  text::write_file(dir / "models.json", json{{"models", index}}.dump(1) + "\n");
}

std::vector<CellModel> load_cell_models(const fs::path& dir) {
  std::vector<std::string> names;
  try {
    names = json::parse(text::read_file(dir / "models.json")).at("models").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError("models.json: " + std::string(e.what()));
  }
  std::vector<CellModel> out;
  for (const auto& n : names) {
    try {
      out.push_back(json::parse(text::read_file(dir / n)).get<CellModel>());
    } catch (const json::exception& e) {
      throw DataError(n + ": " + e.what());
    }
  }
  return out;
}

}  // namespace affect::pipeline
