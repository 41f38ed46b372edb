#pragma once

#include "affect/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace affect::ecg {

inline constexpr double kCleanWindowS = 0.25;
inline constexpr double kRefractoryS = 0.5;
inline constexpr double kThresholdStd = 1.5;

struct RrSeries {
  std::vector<double> intervals_ms;
};

struct RrOptions {
  double clean_window_s{kCleanWindowS};
  double min_separation_s{kRefractoryS};
  double threshold_std{kThresholdStd};  // peak height > mean + k * std of the cleaned signal
};

std::vector<double> clean_ecg(std::span<const double> x, double rate_hz);

// Cleaned signal -> peaks -> successive gaps in ms. Fewer than two peaks
// yields an empty series.
RrSeries extract_rr(std::span<const double> x, double rate_hz, const RrOptions& opts = {});

// Fraction of successive interval pairs differing by more than 50 ms;
// nullopt with fewer than two intervals.
std::optional<double> pnn50(const RrSeries& rr);

// [pnn50_ch1, pnn50_ch2]; nullopt when either channel has no usable RR series.
std::optional<FeatureVector> ecg_features(const SignalBlock& ecg, const RrOptions& opts = {});

}  // namespace affect::ecg
