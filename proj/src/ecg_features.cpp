#include "affect/ecg_features.hpp"

#include "affect/dsp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace affect::ecg {

std::vector<double> clean_ecg(std::span<const double> x, double rate_hz) {
  return dsp::moving_average(x, rate_hz, kCleanWindowS);
}

RrSeries extract_rr(std::span<const double> x, double rate_hz, const RrOptions& opts) {
  const auto cleaned = dsp::moving_average(x, rate_hz, opts.clean_window_s);
  const double threshold = dsp::adaptive_threshold(cleaned, opts.threshold_std);
  const auto peaks = dsp::detect_peaks(cleaned, rate_hz, opts.min_separation_s, threshold);
  RrSeries rr;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    rr.intervals_ms.push_back(static_cast<double>(peaks[i].index - peaks[i - 1].index) * 1000.0 / rate_hz);
  }
  return rr;
}

std::optional<double> pnn50(const RrSeries& rr) {
  const auto& v = rr.intervals_ms;
  if (v.size() < 2) return std::nullopt;
  std::size_t over = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i] - v[i - 1]) > 50.0) ++over;
  }
  return static_cast<double>(over) / static_cast<double>(v.size() - 1);
}

std::optional<FeatureVector> ecg_features(const SignalBlock& ecg, const RrOptions& opts) {
  if (ecg.channel_count() != kEcgChannels) {
    throw std::invalid_argument("ecg_features: expected 2 channels, got " +
                                std::to_string(ecg.channel_count()));
  }
  FeatureVector fv;
  for (std::size_t c = 0; c < kEcgChannels; ++c) {
    const auto p = pnn50(extract_rr(ecg.channel(c), ecg.sample_rate_hz, opts));
    if (!p) return std::nullopt;
    fv.names.push_back("pnn50_ch" + std::to_string(c + 1));
    fv.values.push_back(*p);
  }
  return fv;
}

}  // namespace affect::ecg
