#include "affect/dsp.hpp"

#include "affect/simd/kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace affect::dsp {

namespace {

void require_nonempty(std::span<const double> x, const char* what) {
  if (x.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
}

std::size_t window_samples(double window_s, double rate_hz) {
  return static_cast<std::size_t>(std::llround(window_s * rate_hz));
}

// FFTW plans are created serially and then shared; fftw_execute_dft_r2c on
// fresh buffers is reentrant.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan r2c(int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<int, fftw_plan> plans_;
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

double sum_clog2c(std::span<const std::size_t> counts) {
  double s = 0.0;
  for (std::size_t c : counts) {
    if (c > 0) s += static_cast<double>(c) * std::log2(static_cast<double>(c));
  }
  return s;
}

}  // namespace

std::vector<double> moving_average(std::span<const double> x, double rate_hz, double window_s) {
  require_nonempty(x, "moving_average");
  if (!(window_s > 0.0) || !(rate_hz > 0.0)) {
    throw std::invalid_argument("moving_average: window and rate must be positive");
  }
  const std::size_t w = window_samples(window_s, rate_hz);
  if (w < 1) throw std::invalid_argument("moving_average: window shorter than one sample");

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t left = static_cast<std::ptrdiff_t>(w / 2);
  const std::ptrdiff_t right = static_cast<std::ptrdiff_t>(w) - 1 - left;
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, i - left);
    const std::ptrdiff_t b = std::min<std::ptrdiff_t>(n - 1, i + right);
    double s = 0.0;
    for (std::ptrdiff_t j = a; j <= b; ++j) s += x[j];
    out[i] = s / static_cast<double>(b - a + 1);
  }
  return out;
}

std::vector<Peak> detect_peaks(std::span<const double> x, double rate_hz,
                               double min_separation_s, double min_height) {
  require_nonempty(x, "detect_peaks");
  if (min_separation_s < 0.0) throw std::invalid_argument("detect_peaks: negative separation");

  std::vector<Peak> candidates;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] > x[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i]) {
        const std::size_t mid = (i + j) / 2;
        if (x[mid] > min_height) candidates.push_back({mid, x[mid]});
      }
      i = j + 1;
    } else {
      ++i;
    }
  }

  const double min_dist_f = std::ceil(min_separation_s * rate_hz - 1e-9);
  const std::size_t min_dist = min_dist_f > 0.0 ? static_cast<std::size_t>(min_dist_f) : 0;
  if (min_dist <= 1 || candidates.size() < 2) return candidates;

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].height > candidates[b].height;
  });

  std::vector<char> removed(candidates.size(), 0);
  for (std::size_t k : order) {
    if (removed[k]) continue;
    const std::size_t at = candidates[k].index;
    for (std::size_t l = k; l-- > 0;) {
      if (at - candidates[l].index >= min_dist) break;
      removed[l] = 1;
    }
    for (std::size_t r = k + 1; r < candidates.size(); ++r) {
      if (candidates[r].index - at >= min_dist) break;
      removed[r] = 1;
    }
  }

  std::vector<Peak> kept;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (!removed[k]) kept.push_back(candidates[k]);
  }
  return kept;
}

double adaptive_threshold(std::span<const double> x, double k_std) {
  return mean(x) + k_std * population_std(x);
}

PsdEstimate welch_psd(std::span<const double> x, double rate_hz, double window_s, double hop_s) {
  if (!(rate_hz > 0.0) || !(window_s > 0.0) || !(hop_s > 0.0)) {
    throw std::invalid_argument("welch_psd: rate, window and hop must be positive");
  }
  const std::size_t nw = window_samples(window_s, rate_hz);
  const std::size_t nh = std::max<std::size_t>(1, window_samples(hop_s, rate_hz));
  if (nw < 2 || x.size() < nw) {
    throw std::invalid_argument("welch_psd: signal shorter than one window");
  }
  const std::size_t n_bins = nw / 2 + 1;
  const auto& k = simd::active();

  std::vector<double> window(nw);
  double wss = 0.0;
  for (std::size_t i = 0; i < nw; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(nw));
    wss += window[i] * window[i];
  }

  fftw_plan plan = PlanCache::instance().r2c(static_cast<int>(nw));
  std::unique_ptr<double, FftwFree> seg(fftw_alloc_real(nw));
  std::unique_ptr<fftw_complex, FftwFree> spec(fftw_alloc_complex(n_bins));

  std::vector<double> acc(n_bins, 0.0);
  std::size_t n_segments = 0;
  for (std::size_t start = 0; start + nw <= x.size(); start += nh) {
    const double* s = x.data() + start;
    const double m = std::accumulate(s, s + nw, 0.0) / static_cast<double>(nw);
    k.center_window(s, window.data(), m, seg.get(), nw);
    fftw_execute_dft_r2c(plan, seg.get(), spec.get());
    k.accumulate_power(reinterpret_cast<const double*>(spec.get()), acc.data(), n_bins);
    ++n_segments;
  }

  PsdEstimate out;
  out.window_s = window_s;
  out.hop_s = hop_s;
  out.freqs_hz.resize(n_bins);
  out.power.resize(n_bins);
  const double scale = 1.0 / (rate_hz * wss * static_cast<double>(n_segments));
  for (std::size_t b = 0; b < n_bins; ++b) {
    out.freqs_hz[b] = static_cast<double>(b) * rate_hz / static_cast<double>(nw);
    const bool edge = (b == 0) || (nw % 2 == 0 && b == n_bins - 1);
    out.power[b] = acc[b] * scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

double band_power(const PsdEstimate& p, double lo_hz, double hi_hz) {
  if (p.freqs_hz.empty()) throw std::invalid_argument("band_power: empty estimate");
  const double fmax = p.freqs_hz.back();
  if (!(lo_hz >= 0.0) || !(lo_hz < hi_hz) || hi_hz > fmax + 1e-9) {
    throw std::invalid_argument("band_power: require 0 <= lo < hi <= max frequency");
  }
  const bool include_top = hi_hz >= fmax - 1e-9;
  double s = 0.0;
  for (std::size_t b = 0; b < p.freqs_hz.size(); ++b) {
    const double f = p.freqs_hz[b];
    if (f >= lo_hz && (f < hi_hz || (include_top && b + 1 == p.freqs_hz.size()))) {
      s += p.power[b];
    }
  }
  return s * p.df();
}

std::vector<int> histogram_bins(std::span<const double> x, int n_bins) {
  require_nonempty(x, "histogram_bins");
  if (n_bins < 2) throw std::invalid_argument("histogram_bins: need at least 2 bins");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<int> bins(x.size(), 0);
  if (!(range > 0.0)) return bins;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int b = static_cast<int>(std::floor((x[i] - lo) / range * n_bins));
    bins[i] = std::clamp(b, 0, n_bins - 1);
  }
  return bins;
}

double conditional_entropy_binned(std::span<const int> bx, std::span<const int> by, int n_bins) {
  if (bx.size() != by.size()) throw std::invalid_argument("conditional_entropy: length mismatch");
  if (bx.empty()) throw std::invalid_argument("conditional_entropy: empty signals");
  const std::size_t nb = static_cast<std::size_t>(n_bins);
  std::vector<std::size_t> joint(nb * nb, 0);
  std::vector<std::size_t> marginal_y(nb, 0);
  for (std::size_t i = 0; i < bx.size(); ++i) {
    ++joint[static_cast<std::size_t>(by[i]) * nb + static_cast<std::size_t>(bx[i])];
    ++marginal_y[static_cast<std::size_t>(by[i])];
  }
  // H(X,Y) - H(Y) = (sum_y c_y log c_y - sum_xy c_xy log c_xy) / n
  const double h = (sum_clog2c(marginal_y) - sum_clog2c(joint)) / static_cast<double>(bx.size());
  return std::max(0.0, h);
}

double conditional_entropy(std::span<const double> x, std::span<const double> y, int n_bins) {
  if (x.size() != y.size()) throw std::invalid_argument("conditional_entropy: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("conditional_entropy: need at least 2 samples");
  const auto bx = histogram_bins(x, n_bins);
  const auto by = histogram_bins(y, n_bins);
  return conditional_entropy_binned(bx, by, n_bins);
}

double mean(std::span<const double> x) {
  require_nonempty(x, "mean");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double population_std(std::span<const double> x) {
  require_nonempty(x, "population_std");
  const double m = mean(x);
  double mom[3];
  simd::active().central_moments(x.data(), x.size(), m, mom);
  return std::sqrt(mom[0] / static_cast<double>(x.size()));
}

double percentile(std::span<const double> x, double q) {
  require_nonempty(x, "percentile");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

SummaryStats summary_stats(std::span<const double> x) {
  require_nonempty(x, "summary_stats");
  SummaryStats st;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  st.min = *lo_it;
  st.max = *hi_it;
  const double n = static_cast<double>(x.size());
  if (st.min == st.max) {
    st.mean = st.min;
    st.p95 = st.min;
    return st;
  }
  st.mean = mean(x);
  double mom[3];
  simd::active().central_moments(x.data(), x.size(), st.mean, mom);
  const double m2 = mom[0] / n;
  st.std = std::sqrt(m2);
  if (m2 > 0.0) {
    st.skewness = (mom[1] / n) / std::pow(m2, 1.5);
    st.kurtosis = (mom[2] / n) / (m2 * m2);
  }
  st.p95 = percentile(x, 0.95);
  if (x.size() >= 3) {
    double d1 = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) d1 += std::abs(x[i] - x[i - 1]);
    double d2 = 0.0;
    for (std::size_t i = 2; i < x.size(); ++i) d2 += std::abs(x[i] - 2.0 * x[i - 1] + x[i - 2]);
    st.mean_abs_diff1 = d1 / (n - 1.0);
    st.mean_abs_diff2 = d2 / (n - 2.0);
  }
  return st;
}

}  // namespace affect::dsp
