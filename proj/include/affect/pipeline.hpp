#pragma once

#include "affect/dataset_io.hpp"
#include "affect/eeg_features.hpp"
#include "affect/face_features.hpp"
#include "affect/elm.hpp"
#include "affect/labels.hpp"
#include "affect/transforms.hpp"
#include "affect/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace affect::pipeline {

enum class FeatureSet { EEG, ECG, GSR, FaceAu, FaceEmbed };
enum class BaselineMode { Raw, Compensated, Both };
enum class Target { Valence, Arousal, Liking, Dominance, Emotion4, Emotion8 };

const char* feature_set_name(FeatureSet f);
const char* baseline_mode_name(BaselineMode m);
const char* target_name(Target t);
FeatureSet parse_feature_set(const std::string& s);  // ConfigError on unknown names
BaselineMode parse_baseline_mode(const std::string& s);
Target parse_target(const std::string& s);

// "eeg+face_au"
std::string features_label(const std::vector<FeatureSet>& group);

struct ExperimentConfig {
  std::filesystem::path manifest;
  double split_fraction{0.8};
  std::uint64_t split_seed{1};
  std::vector<FeatureSet> modalities{FeatureSet::EEG, FeatureSet::ECG, FeatureSet::GSR, FeatureSet::FaceAu,
                                     FeatureSet::FaceEmbed};
  std::vector<std::vector<FeatureSet>> fusion_groups{{FeatureSet::EEG, FeatureSet::FaceAu},
                                                     {FeatureSet::GSR, FeatureSet::ECG}};
  BaselineMode baseline_mode{BaselineMode::Both};
  std::vector<Target> targets{Target::Valence, Target::Arousal, Target::Liking,
                              Target::Dominance, Target::Emotion4, Target::Emotion8};
  elm::Grid grid;
  int folds{10};
  std::uint64_t elm_seed{1};
  std::string embedder{"stub64"};
  std::filesystem::path embedder_dir;
  std::filesystem::path layout_csv;     // empty: built-in 14-electrode layout
  std::filesystem::path au_config_csv;  // empty: built-in 30-pair table
  int entropy_bins{16};
  bool topo_log_power{false};
  int threads{1};
  bool check_duration_range{true};
};

// Relative paths resolve against base_dir. Unknown keys and invalid values
// throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate_config(const ExperimentConfig& c);

struct Split {
  std::vector<std::string> train;  // trial keys
  std::vector<std::string> test;
};

// Shuffle of trial keys by seed; the first floor(n * fraction) go to train.
Split split_dataset(const Dataset& d, double fraction, std::uint64_t seed);

struct FeatureMatrix {
  std::vector<std::string> ids;    // trial keys, ascending
  std::vector<std::string> names;
  Matrix values;                   // ids.size() x names.size()
  std::vector<std::string> excluded;  // trials lacking the modality

  Eigen::Index width() const { return values.cols(); }
};

struct FittedTransforms {
  eeg::EegPca eeg_pca;
  PcaModel face_pca;
};

// Layout, renderer, embedder and AU table built once from a config.
class ExtractionSetup {
 public:
  explicit ExtractionSetup(const ExperimentConfig& cfg);

  const eeg::TopoRenderer& renderer() const { return renderer_; }
  const eeg::EmbeddingProvider& embedder() const { return *embedder_; }
  const face::AuFeatureConfig& au_config() const { return au_; }
  int entropy_bins() const { return bins_; }
  const eeg::TopoOptions& topo() const { return topo_; }

 private:
  eeg::TopoRenderer renderer_;
  std::unique_ptr<eeg::EmbeddingProvider> embedder_;
  face::AuFeatureConfig au_;
  int bins_;
  eeg::TopoOptions topo_;
};

struct TrialRatings {
  Ratings pre;
  Ratings post;
};

struct ExtractedData {
  Split split;
  std::map<FeatureSet, FeatureMatrix> features;
  std::map<std::string, TrialRatings> ratings;
  FittedTransforms transforms;
  std::vector<std::string> warnings;
};

// Computes every requested modality's feature matrix. PCA transforms are
// fitted on the training trials only. With split == nullptr the split comes
// from the config.
ExtractedData extract_all(const Dataset& d, const ExperimentConfig& cfg, const Split* split = nullptr);

// Single modality with already fitted transforms.
FeatureMatrix extract_features(const Dataset& d, FeatureSet modality, const FittedTransforms& t,
                               const ExtractionSetup& setup, int threads = 1);

FittedTransforms fit_transforms(const Dataset& d, const std::vector<std::string>& train_ids,
                                const std::vector<FeatureSet>& modalities, const ExtractionSetup& setup,
                                int threads = 1);

struct FusedMatrix {
  FeatureMatrix matrix;
  std::vector<ZScoreModel> group_norms;
};

// Inner join on trial ids, per-group z-score fitted on the train ids, then
// column concatenation. Throws DataError when no id is common to all groups.
FusedMatrix fuse(const std::vector<const FeatureMatrix*>& groups, const std::vector<std::string>& train_ids);
FeatureMatrix apply_fusion(const std::vector<const FeatureMatrix*>& groups, const std::vector<ZScoreModel>& norms);

// Class label of a trial for a target (0/1 for binary, enum value otherwise).
int target_label(Target t, const TrialRatings& r, bool compensated);

struct Cell {
  Target target{Target::Valence};
  std::vector<FeatureSet> features;
  bool compensated{true};

  std::string features_name() const { return features_label(features); }
};

// Deterministic order: target, then modalities followed by fusion groups,
// then raw before compensated.
std::vector<Cell> plan_cells(const ExperimentConfig& cfg);

struct CellModel {
  Cell cell;
  std::vector<ZScoreModel> group_norms;  // fusion only
  elm::ElmModel elm;
  elm::CvReport cv;
  std::size_t n_train{0};
};

// CV-tuned ELM on the cell's training rows; nullopt (with reason) when the
// training labels hold a single class or there are no rows.
std::optional<CellModel> train_cell(const ExtractedData& x, const Cell& cell, const ExperimentConfig& cfg,
                                    std::string* skip_reason = nullptr);

struct ResultRow {
  std::string target;
  std::string features;
  std::string baseline_mode;
  double accuracy{0.0};
  double chance{0.0};
  std::size_t n_train{0};
  std::size_t n_test{0};
  Eigen::Index hidden{0};
  double lambda{0.0};
  double cv_accuracy{0.0};
};

std::optional<ResultRow> evaluate_cell(const ExtractedData& x, const CellModel& m,
                                       std::string* skip_reason = nullptr);

struct ResultsTable {
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
};

ResultsTable run_experiment(const Dataset& d, const ExperimentConfig& cfg, const Split* split = nullptr);
ResultsTable run_experiment(const ExperimentConfig& cfg);

// Loads the manifest named by the config.
Dataset load_dataset(const ExperimentConfig& cfg, LoadReport* report = nullptr);

inline constexpr const char* kResultsHeader = "target,features,baseline_mode,accuracy,chance,n_train,n_test";

std::string results_csv(const ResultsTable& r);
std::string results_text(const ResultsTable& r);
ResultsTable parse_results_csv(const std::string& csv);
// Writes results.csv and results.txt into dir.
void emit_report(const ResultsTable& r, const std::filesystem::path& dir);

// Stage files: split.json, ratings.csv, transforms.json and one
// features_<modality>.csv ("subject_id,video_id,split,<names>") per modality.
void write_extracted(const ExtractedData& x, const std::filesystem::path& dir);
ExtractedData read_extracted(const std::filesystem::path& dir);

void to_json(nlohmann::json& j, const CellModel& m);
void from_json(const nlohmann::json& j, CellModel& m);
std::string cell_file_name(const Cell& c);
void save_cell_models(const std::vector<CellModel>& models, const std::filesystem::path& dir);
std::vector<CellModel> load_cell_models(const std::filesystem::path& dir);

}  // namespace affect::pipeline
