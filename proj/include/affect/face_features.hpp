#pragma once

#include "affect/transforms.hpp"
#include "affect/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace affect::face {

inline constexpr int kAuFeatures = 30;
inline constexpr int kAuTrialFeatures = 90;
inline constexpr int kEmbedPca = 50;
inline constexpr std::size_t kAggregateDim = 3 * kEmbeddingDim;

enum class Normalizer { Width, Height };

struct AuPair {
  int index_a{1};  // 1-based landmark index
  int index_b{2};
  Normalizer normalizer{Normalizer::Height};
  std::string comment;
};

struct AuFeatureConfig {
  std::vector<AuPair> pairs;

  // 30 normalised landmark distances covering brows, eyes, nose and mouth
  // on the 49-point layout (1-10 brows, 11-19 nose, 20-31 eyes, 32-49 lips).
  static AuFeatureConfig default_30();
};

std::vector<std::string> validate_config(const AuFeatureConfig& cfg);
// CSV "index_a,index_b,normalizer,comment" with a header and 30 rows;
// normalizer is "width" or "height".
AuFeatureConfig read_au_config_csv(const std::filesystem::path& path);
void write_au_config_csv(const AuFeatureConfig& cfg, const std::filesystem::path& path);

struct FaceBox {
  double width{0.0};
  double height{0.0};
};

// Axis-aligned extent of the landmarks; throws on a degenerate box.
FaceBox face_box(const LandmarkFrame& f);

std::vector<double> au_features_frame(const LandmarkFrame& f, const AuFeatureConfig& cfg);

// [30 means | 30 p95s | 30 stds] across frames; nullopt for no frames.
std::optional<FeatureVector> au_features_trial(const std::vector<LandmarkFrame>& frames,
                                               const AuFeatureConfig& cfg);

// Per-dimension [mean | p95 | std] over frames, 12288 values.
std::vector<double> aggregate_embeddings(const std::vector<EmbeddingFrame>& frames);

// Aggregate then project with a k=50 PCA fitted on training aggregates.
FeatureVector face_embedding_features(const std::vector<double>& aggregate, const PcaModel& pca);
std::optional<FeatureVector> face_embedding_trial(const std::vector<EmbeddingFrame>& frames,
                                                  const PcaModel& pca);

}  // namespace affect::face
