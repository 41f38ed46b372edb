#include "affect/gsr_features.hpp"

#include "affect/dsp.hpp"

#include <cmath>
#include <stdexcept>

namespace affect::gsr {

FeatureVector gsr_features(const SignalBlock& gsr, const GsrOptions& opts) {
  if (gsr.channel_count() != kGsrChannels) throw std::invalid_argument("gsr_features: expected 1 channel");
  if (gsr.n_samples() == 0) throw std::invalid_argument("gsr_features: empty signal");

  const auto smooth = dsp::moving_average(gsr.channel(0), gsr.sample_rate_hz, opts.smooth_window_s);
  const auto st = dsp::summary_stats(smooth);
  const double threshold = st.mean + opts.threshold_std * st.std;
  const auto peaks = dsp::detect_peaks(smooth, gsr.sample_rate_hz, opts.min_separation_s, threshold);

  double height = 0.0;
  for (const auto& p : peaks) height += std::abs(p.height - st.mean);
  if (!peaks.empty()) height /= static_cast<double>(peaks.size());

  FeatureVector fv;
  fv.names = {"gsr_n_peaks", "gsr_mean_abs_peak_height", "gsr_mean",           "gsr_std",
              "gsr_skewness", "gsr_kurtosis",            "gsr_mean_abs_diff1", "gsr_mean_abs_diff2"};
  fv.values = {static_cast<double>(peaks.size()), height, st.mean, st.std, st.skewness, st.kurtosis,
               st.mean_abs_diff1, st.mean_abs_diff2};
  return fv;
}

}  // namespace affect::gsr
