#include "affect/dataset_io.hpp"
#include "affect/error.hpp"
#include "affect/pipeline.hpp"
#include "affect/synth.hpp"
#include "affect/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace affect;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;

// Flags that override config keys; unset flags leave the config untouched.
struct Overrides {
  std::string config;
  std::string manifest;
  std::optional<double> split_fraction;
  std::optional<std::uint64_t> split_seed;
  std::vector<std::string> modalities;
  std::vector<std::string> fusion;
  bool no_fusion{false};
  std::vector<std::string> targets;
  std::string baseline_mode;
  std::vector<long> hidden;
  std::vector<double> lambdas;
  std::optional<int> folds;
  std::optional<std::uint64_t> elm_seed;
  std::string embedder;
  std::string embedder_dir;
  std::optional<int> threads;
  std::optional<int> entropy_bins;
  bool log_power{false};

  void add_to(CLI::App* app, bool with_manifest = true) {
    app->add_option("--config", config, "experiment config JSON");
    if (with_manifest) app->add_option("--manifest", manifest, "dataset manifest (overrides config)");
    app->add_option("--split-fraction", split_fraction, "training fraction");
    app->add_option("--split-seed", split_seed, "split shuffle seed");
    app->add_option("--modalities", modalities, "eeg,ecg,gsr,face_au,face_embed")->delimiter(',');
    app->add_option("--fusion", fusion, "fusion group such as eeg+face_au (repeatable)");
    app->add_flag("--no-fusion", no_fusion, "drop all fusion groups");
    app->add_option("--targets", targets, "valence,arousal,liking,dominance,emotion4,emotion8")->delimiter(',');
    app->add_option("--baseline-mode", baseline_mode, "raw, compensated or both");
    app->add_option("--hidden", hidden, "ELM hidden sizes grid")->delimiter(',');
    app->add_option("--lambda", lambdas, "ELM ridge grid")->delimiter(',');
    app->add_option("--folds", folds, "cross-validation folds");
    app->add_option("--elm-seed", elm_seed, "ELM and fold seed");
    app->add_option("--embedder", embedder, "stub64 or file");
    app->add_option("--embedder-dir", embedder_dir, "directory for the file embedder");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
    app->add_option("--entropy-bins", entropy_bins, "histogram bins for conditional entropy");
    app->add_flag("--log-power", log_power, "render topomaps from log10 band power");
  }

  pipeline::ExperimentConfig resolve() const {
    json j = json::object();
    fs::path base;
    if (!config.empty()) {
      try {
        j = json::parse(text::read_file(config));
      } catch (const json::exception& e) {
        throw ConfigError("config " + config + " is not valid JSON: " + e.what());
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
      base = fs::path(config).parent_path();
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto abs = [](const std::string& p) { return fs::absolute(p).string(); };
    if (!manifest.empty()) j["manifest"] = abs(manifest);
    if (split_fraction) j["split_fraction"] = *split_fraction;
    if (split_seed) j["split_seed"] = *split_seed;
    if (!modalities.empty()) j["modalities"] = modalities;
    if (no_fusion) j["fusion_groups"] = json::array();
    if (!fusion.empty()) {
      json groups = json::array();
      for (const auto& g : fusion) {
        std::vector<std::string> parts;
        for (auto p : text::split(g, '+')) parts.emplace_back(text::trim(p));
        groups.push_back(parts);
      }
      j["fusion_groups"] = groups;
    }
    if (!targets.empty()) j["targets"] = targets;
    if (!baseline_mode.empty()) j["baseline_mode"] = baseline_mode;
    if (!hidden.empty()) j["elm"]["hidden"] = hidden;
    if (!lambdas.empty()) j["elm"]["lambda"] = lambdas;
    if (folds) j["elm"]["folds"] = *folds;
    if (elm_seed) j["elm"]["seed"] = *elm_seed;
    if (!embedder.empty()) j["embedder"]["kind"] = embedder;
    if (!embedder_dir.empty()) j["embedder"]["dir"] = abs(embedder_dir);
    if (threads) j["threads"] = *threads;
    if (entropy_bins) j["entropy_bins"] = *entropy_bins;
    if (log_power) j["topo_log_power"] = true;
    return pipeline::config_from_json(j, base);
  }
};

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

void write_warnings(const std::vector<std::string>& w, const fs::path& dir) {
  std::string out;
  for (const auto& s : w) out += s + "\n";
  text::write_file(dir / "warnings.txt", out);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal emotion classification: synthesize, extract, train, evaluate, report"};
  app.require_subcommand(1);

  // synth
  int subjects = 40, videos = 16;
  std::uint64_t seed = 1;
  std::string synth_out;
  synth::LabelPlan plan;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic planted-signal dataset");
  synth_cmd->add_option("--subjects", subjects, "number of subjects")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--videos", videos, "videos per subject")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", seed, "generator seed");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_flag("--random-labels", plan.random_labels, "ratings unrelated to the planted signals");
  synth_cmd->add_option("--missing-rate", plan.missing_rate, "per-modality omission probability")
      ->check(CLI::Range(0.0, 0.99));
  synth_cmd->add_option("--min-duration", plan.min_duration_s, "shortest trial in seconds");
  synth_cmd->add_option("--max-duration", plan.max_duration_s, "longest trial in seconds");
  synth_cmd->add_option("--embedding-stride", plan.embedding_stride_s, "seconds between face embedding frames");
  bool no_embeddings = false;
  synth_cmd->add_flag("--no-embeddings", no_embeddings, "omit face embedding files");

  // extract
  Overrides extract_ov;
  std::string extract_out;
  auto* extract_cmd = app.add_subcommand("extract", "split the dataset, fit transforms, write feature matrices");
  extract_ov.add_to(extract_cmd);
  extract_cmd->add_option("--out", extract_out, "feature directory")->required();

  // train
  Overrides train_ov;
  std::string train_features, train_out;
  auto* train_cmd = app.add_subcommand("train", "cross-validate and fit one ELM per experiment cell");
  train_ov.add_to(train_cmd, false);
  train_cmd->add_option("--features", train_features, "directory written by extract")->required();
  train_cmd->add_option("--out", train_out, "model directory")->required();

  // evaluate
  std::string eval_features, eval_models, eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "score trained models on the test split");
  eval_cmd->add_option("--features", eval_features, "directory written by extract")->required();
  eval_cmd->add_option("--models", eval_models, "directory written by train")->required();
  eval_cmd->add_option("--out", eval_out, "results directory")->required();

  // report
  std::string report_results, report_out;
  auto* report_cmd = app.add_subcommand("report", "render results.csv as a text table");
  report_cmd->add_option("--results", report_results, "results CSV")->required();
  report_cmd->add_option("--out", report_out, "output directory (default: alongside the CSV)");

  // run
  Overrides run_ov;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "full experiment: load, extract, train, evaluate, report");
  run_ov.add_to(run_cmd);
  run_cmd->add_option("--out", run_out, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (*synth_cmd) {
      plan.embeddings = !no_embeddings;
      if (plan.max_duration_s < plan.min_duration_s) throw ConfigError("--max-duration is below --min-duration");
      const Dataset d = synth::generate_synthetic_dataset(subjects, videos, seed, plan);
      const fs::path manifest = write_dataset(d, synth_out);
      std::cout << "wrote " << d.trials.size() << " trials to " << manifest.string() << "\n";
    } else if (*extract_cmd) {
      const auto cfg = extract_ov.resolve();
      LoadReport rep;
      const Dataset d = pipeline::load_dataset(cfg, &rep);
      print_warnings(rep.warnings);
      for (const auto& r : rep.rejected) std::cerr << "rejected: " << r << "\n";
      auto x = pipeline::extract_all(d, cfg);
      print_warnings(x.warnings);
      pipeline::write_extracted(x, extract_out);
      text::write_file(fs::path(extract_out) / "config.json", pipeline::config_to_json(cfg).dump(1) + "\n");
      std::cout << "train " << x.split.train.size() << " / test " << x.split.test.size() << "\n";
      for (const auto& [f, fm] : x.features) {
        std::cout << pipeline::feature_set_name(f) << ": " << fm.ids.size() << " trials x " << fm.width()
                  << " features, " << fm.excluded.size() << " excluded\n";
      }
    } else if (*train_cmd) {
      const pipeline::ExperimentConfig cfg =
          train_ov.config.empty() && fs::exists(fs::path(train_features) / "config.json")
              ? [&] {
                  Overrides o = train_ov;
                  o.config = (fs::path(train_features) / "config.json").string();
                  return o.resolve();
                }()
              : train_ov.resolve();
      const auto x = pipeline::read_extracted(train_features);
      std::vector<pipeline::CellModel> models;
      for (const auto& cell : pipeline::plan_cells(cfg)) {
        std::string why;
        std::optional<pipeline::CellModel> m;
        try {
          m = pipeline::train_cell(x, cell, cfg, &why);
        } catch (const DataError& e) {
          why = e.what();
        }
        const std::string tag = std::string(pipeline::target_name(cell.target)) + "/" + cell.features_name() + "/" +
                                (cell.compensated ? "compensated" : "raw");
        if (!m) {
          std::cerr << "warning: " << tag << " skipped: " << why << "\n";
          continue;
        }
        print_warnings(m->cv.warnings);
        std::cout << tag << ": L=" << m->elm.hidden_dim << " lambda=" << text::format_double(m->elm.ridge_lambda)
                  << " cv=" << text::format_double(m->cv.mean_accuracy) << "\n";
        models.push_back(std::move(*m));
      }
      pipeline::save_cell_models(models, train_out);
    } else if (*eval_cmd) {
      const auto x = pipeline::read_extracted(eval_features);
      pipeline::ResultsTable t;
      for (const auto& m : pipeline::load_cell_models(eval_models)) {
        std::string why;
        auto row = pipeline::evaluate_cell(x, m, &why);
        if (row) t.rows.push_back(*row);
        else t.warnings.push_back(pipeline::cell_file_name(m.cell) + " skipped: " + why);
      }
      print_warnings(t.warnings);
      pipeline::emit_report(t, eval_out);
      std::cout << pipeline::results_text(t);
    } else if (*report_cmd) {
      const auto t = pipeline::parse_results_csv(text::read_file(report_results));
      const fs::path dir = report_out.empty() ? fs::path(report_results).parent_path() : fs::path(report_out);
      fs::create_directories(dir.empty() ? fs::path(".") : dir);
      text::write_file((dir.empty() ? fs::path(".") : dir) / "results.txt", pipeline::results_text(t));
      std::cout << pipeline::results_text(t);
    } else if (*run_cmd) {
      const auto cfg = run_ov.resolve();
      const auto t = pipeline::run_experiment(cfg);
      print_warnings(t.warnings);
      pipeline::emit_report(t, run_out);
      write_warnings(t.warnings, run_out);
      text::write_file(fs::path(run_out) / "config.json", pipeline::config_to_json(cfg).dump(1) + "\n");
      std::cout << pipeline::results_text(t);
    }
    std::cerr << "done in " << text::format_double(std::round(seconds_since(t0) * 10.0) / 10.0) << " s\n";
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
