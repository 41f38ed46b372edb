#pragma once

#include "affect/types.hpp"

#include <cstdint>

namespace affect::synth {

// Rating dimension that drives a planted signal, or None for label-free noise.
enum class Driver { None, Valence, Arousal, Liking, Dominance };

struct LabelPlan {
  Driver eeg_alpha{Driver::Valence};   // occipito-parietal 10 Hz source amplitude
  Driver eeg_beta{Driver::Arousal};    // frontal 20 Hz amplitude
  Driver ecg_jitter{Driver::Arousal};  // RR-interval variability and heart rate
  Driver gsr_peaks{Driver::Valence};   // skin-conductance response rate and size
  Driver face_mouth{Driver::Valence};  // mouth width and corner lift
  Driver face_brow{Driver::Arousal};   // brow raise
  Driver face_embedding{Driver::Valence};

  // Ratings drawn independently of the planted signal classes.
  bool random_labels{false};
  // Per-trial probability of omitting each of ECG, GSR, landmarks, embeddings.
  double missing_rate{0.0};
  double rate_hz{128.0};
  double min_duration_s{51.0};
  double max_duration_s{150.0};
  double embedding_stride_s{30.0};
  bool embeddings{true};
};

// Pure function of its arguments. Ratings are consistent with the planted
// classes after baseline compensation: compensated >= 5 exactly when the
// driving dimension's class is high.
Dataset generate_synthetic_dataset(int n_subjects, int n_videos, std::uint64_t seed, const LabelPlan& plan = {});

}  // namespace affect::synth
