#include "affect/validate.hpp"

#include <cmath>
#include <string>

namespace affect {

bool rating_in_range(double v) { return std::isfinite(v) && v >= 1.0 && v <= 9.0; }

bool ratings_in_range(const Ratings& r) {
  return rating_in_range(r.valence) && rating_in_range(r.arousal) && rating_in_range(r.liking) &&
         rating_in_range(r.dominance);
}

std::vector<Finding> validate_signal(const SignalBlock& s) {
  std::vector<Finding> out;
  const std::string tag = modality_name(s.modality);
  const std::size_t want = expected_channels(s.modality);
  if (s.channel_count() != want) {
    out.push_back({"channel_count mismatch", tag + ": expected " + std::to_string(want) + ", got " +
                                                 std::to_string(s.channel_count())});
  }
  if (!(s.sample_rate_hz > 0.0) || !std::isfinite(s.sample_rate_hz)) {
    out.push_back({"sample_rate", tag + ": sample rate must be positive"});
  }
  if (s.n_samples() < 1) out.push_back({"empty signal", tag});
  for (std::size_t c = 0; c < s.channel_count(); ++c) {
    if (s.samples[c].size() != s.n_samples()) {
      out.push_back({"ragged channels", tag + ": channel " + std::to_string(c + 1)});
      break;
    }
  }
  for (std::size_t c = 0; c < s.channel_count(); ++c) {
    bool bad = false;
    for (double v : s.samples[c]) {
      if (!std::isfinite(v)) {
        bad = true;
        break;
      }
    }
    if (bad) {
      out.push_back({"non-finite samples", tag + ": channel " + std::to_string(c + 1)});
      break;
    }
  }
  return out;
}

std::vector<Finding> validate_trial(const TrialRecord& t, const ValidationOptions& opts) {
  std::vector<Finding> out;
  if (!t.has_any_modality()) out.push_back({"no modality", "trial carries no modality"});
  if (!ratings_in_range(t.ratings_pre) || !ratings_in_range(t.ratings_post)) {
    out.push_back({"rating-out-of-range", "ratings must lie in [1, 9]"});
  }

  bool any_signal = false;
  for (const auto* s : {&t.eeg, &t.ecg, &t.gsr}) {
    if (!*s) continue;
    any_signal = true;
    auto f = validate_signal(**s);
    out.insert(out.end(), f.begin(), f.end());
    const double dt = std::abs((*s)->duration_s() - t.duration_s);
    if (dt > opts.duration_tolerance_s) {
      out.push_back({"duration mismatch", std::string(modality_name((*s)->modality)) + ": " +
                                              std::to_string((*s)->duration_s()) + " s vs " +
                                              std::to_string(t.duration_s) + " s"});
    }
  }
  if (any_signal && opts.check_duration_range &&
      (t.duration_s < opts.min_duration_s || t.duration_s > opts.max_duration_s)) {
    out.push_back({"duration out of range", std::to_string(t.duration_s) + " s"});
  }

  if (t.landmarks) {
    double prev = -1.0;
    for (std::size_t i = 0; i < t.landmarks->size(); ++i) {
      const auto& f = (*t.landmarks)[i];
      if (f.points.size() != kLandmarkPoints) {
        out.push_back({"landmark count", "frame " + std::to_string(i) + " has " +
                                             std::to_string(f.points.size()) + " points"});
        break;
      }
      bool finite = std::isfinite(f.t_s);
      for (const auto& p : f.points) finite = finite && std::isfinite(p.x) && std::isfinite(p.y);
      if (!finite) {
        out.push_back({"non-finite landmark", "frame " + std::to_string(i)});
        break;
      }
      if (f.t_s < 0.0 || f.t_s <= prev) {
        out.push_back({"landmark order", "frames must be sorted strictly by t_s"});
        break;
      }
      prev = f.t_s;
    }
  }

  if (t.face_embeddings) {
    for (std::size_t i = 0; i < t.face_embeddings->size(); ++i) {
      const auto& f = (*t.face_embeddings)[i];
      if (f.vector.size() != kEmbeddingDim) {
        out.push_back({"embedding length", "frame " + std::to_string(i) + " has " +
                                               std::to_string(f.vector.size()) + " values"});
        break;
      }
      bool finite = std::isfinite(f.t_s) && f.t_s >= 0.0;
      for (double v : f.vector) finite = finite && std::isfinite(v);
      if (!finite) {
        out.push_back({"non-finite embedding", "frame " + std::to_string(i)});
        break;
      }
    }
  }
  return out;
}

}  // namespace affect
