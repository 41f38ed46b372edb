#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace affect::dsp {

// Centered moving average. Windows are round(window_s * rate_hz) samples
// wide (offsets [-w/2, w - 1 - w/2]); near the edges the mean is taken over
// the samples that exist. Output length equals input length.
std::vector<double> moving_average(std::span<const double> x, double rate_hz, double window_s);

struct Peak {
  std::size_t index{0};
  double height{0.0};

  bool operator==(const Peak&) const = default;
};

// Local maxima strictly above min_height. A flat top counts as one maximum
// located at its middle sample (rounded down) when both neighbours are lower.
// Maxima closer than min_separation_s are resolved greedily: tallest first,
// earlier index on equal height. Result is sorted by index.
std::vector<Peak> detect_peaks(std::span<const double> x, double rate_hz,
                               double min_separation_s, double min_height);

// Threshold mean + k * std (population) of x.
double adaptive_threshold(std::span<const double> x, double k_std);

struct PsdEstimate {
  std::vector<double> freqs_hz;
  std::vector<double> power;  // signal^2 / Hz, one-sided
  double window_s{1.0};
  double hop_s{0.5};

  double df() const { return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0; }
};

// Welch estimate: Hann segments of window_s every hop_s, each segment mean
// removed, one-sided density scaling so that sum(power) * df equals the
// window-weighted segment variance. Segment periodograms are averaged.
PsdEstimate welch_psd(std::span<const double> x, double rate_hz, double window_s = 1.0,
                      double hop_s = 0.5);

// sum(power) * df over bins lo <= f < hi. The top bin is included when hi
// reaches the highest frequency of the estimate, so a partition of
// [0, nyquist] recovers the total.
double band_power(const PsdEstimate& p, double lo_hz, double hi_hz);

inline constexpr int kDefaultEntropyBins = 16;

// Equal-width histogram bin of every sample over the signal's own [min, max].
// A constant signal lands entirely in bin 0.
std::vector<int> histogram_bins(std::span<const double> x, int n_bins);

// H(X | Y) in bits from the joint equal-width histogram.
double conditional_entropy(std::span<const double> x, std::span<const double> y,
                           int n_bins = kDefaultEntropyBins);

// Same quantity from precomputed bin indices (see histogram_bins).
double conditional_entropy_binned(std::span<const int> bx, std::span<const int> by, int n_bins);

struct SummaryStats {
  double mean{0.0};
  double std{0.0};  // population
  double min{0.0};
  double max{0.0};
  double skewness{0.0};
  double kurtosis{0.0};  // non-excess; 0 when std == 0
  double p95{0.0};
  double mean_abs_diff1{0.0};
  double mean_abs_diff2{0.0};
};

SummaryStats summary_stats(std::span<const double> x);

// Linear interpolation between order statistics at position q * (n - 1).
double percentile(std::span<const double> x, double q);

double mean(std::span<const double> x);
double population_std(std::span<const double> x);

}  // namespace affect::dsp
