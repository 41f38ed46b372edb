#pragma once

#include "affect/types.hpp"

namespace affect::gsr {

inline constexpr int kFeatureCount = 8;

struct GsrOptions {
  double smooth_window_s{0.25};
  double min_separation_s{1.0};
  double threshold_std{1.0};
};

// [n_peaks, mean_abs_peak_height, mean, std, skewness, kurtosis,
//  mean_abs_diff1, mean_abs_diff2] of the smoothed signal. Peak height is
// measured from the signal mean, so a constant offset only moves `mean`.
FeatureVector gsr_features(const SignalBlock& gsr, const GsrOptions& opts = {});

}  // namespace affect::gsr
