#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace affect {

enum class Modality { EEG, ECG, GSR };

const char* modality_name(Modality m);

inline constexpr std::size_t kEegChannels = 14;
inline constexpr std::size_t kEcgChannels = 2;
inline constexpr std::size_t kGsrChannels = 1;
inline constexpr std::size_t kLandmarkPoints = 49;
inline constexpr std::size_t kEmbeddingDim = 4096;

std::size_t expected_channels(Modality m);

// Fixed-rate multichannel time series, stored channel-major.
struct SignalBlock {
  Modality modality{Modality::EEG};
  double sample_rate_hz{128.0};
  std::vector<std::vector<double>> samples;  // samples[ch][i]

  std::size_t channel_count() const { return samples.size(); }
  std::size_t n_samples() const { return samples.empty() ? 0 : samples[0].size(); }
  double duration_s() const { return static_cast<double>(n_samples()) / sample_rate_hz; }
  std::span<const double> channel(std::size_t ch) const { return samples.at(ch); }
};

struct Point2 {
  double x{0.0};
  double y{0.0};
};

struct LandmarkFrame {
  double t_s{0.0};
  std::vector<Point2> points;  // 49 entries, 0-based storage of points 1..49
};

struct EmbeddingFrame {
  double t_s{0.0};
  std::vector<double> vector;  // 4096 entries
};

struct Ratings {
  double valence{5.0};
  double arousal{5.0};
  double liking{5.0};
  double dominance{5.0};

  bool operator==(const Ratings&) const = default;
};

struct TrialRecord {
  std::string subject_id;
  std::string video_id;
  double duration_s{0.0};
  std::optional<SignalBlock> eeg;
  std::optional<SignalBlock> ecg;
  std::optional<SignalBlock> gsr;
  std::optional<std::vector<LandmarkFrame>> landmarks;
  std::optional<std::vector<EmbeddingFrame>> face_embeddings;
  Ratings ratings_pre;
  Ratings ratings_post;

  // "<subject_id>/<video_id>", the row key used by feature matrices.
  std::string key() const { return subject_id + "/" + video_id; }
  bool has_any_modality() const {
    return eeg || ecg || gsr || landmarks || face_embeddings;
  }
};

struct Dataset {
  std::vector<TrialRecord> trials;
  std::string manifest_path;

  const TrialRecord* find(const std::string& key) const;
};

// Named, ordered real-valued features for one modality of one trial.
struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  void append(const FeatureVector& other);
};

}  // namespace affect
