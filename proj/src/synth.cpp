#include "affect/synth.hpp"

#include "affect/labels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace affect::synth {

namespace {

using Rng = std::mt19937_64;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double q2(double v) { return std::round(v * 100.0) / 100.0; }

std::string pad_id(char prefix, int i, int n) {
  const int width = std::max(2, static_cast<int>(std::to_string(n).size()));
  std::string s = std::to_string(i);
  return std::string(1, prefix) + std::string(static_cast<std::size_t>(width) - s.size(), '0') + s;
}

struct Classes {
  std::array<bool, 4> high{};  // valence, arousal, liking, dominance

  bool of(Driver d) const {
    switch (d) {
      case Driver::Valence: return high[0];
      case Driver::Arousal: return high[1];
      case Driver::Liking: return high[2];
      case Driver::Dominance: return high[3];
      case Driver::None: return false;
    }
    return false;
  }
};

// Pre-rating near neutral and a post-rating whose compensated value lands on
// the requested side of 5.
std::pair<double, double> draw_rating(Rng& rng, bool high) {
  std::normal_distribution<double> pre_dist(5.0, 1.2);
  std::uniform_real_distribution<double> hi(6.0, 8.5), lo(1.5, 4.0);
  for (;;) {
    const double pre = std::clamp(std::round(pre_dist(rng)), 3.0, 7.0);
    const double target = high ? hi(rng) : lo(rng);
    const double post = q2(target - (pre - kNeutralRating));
    if (post < 1.0 || post > 9.0) continue;
    if ((compensate_baseline(pre, post) >= kNeutralRating) != high) continue;
    return {pre, post};
  }
}

void set_dim(Ratings& r, int dim, double v) {
  switch (dim) {
    case 0: r.valence = v; break;
    case 1: r.arousal = v; break;
    case 2: r.liking = v; break;
    default: r.dominance = v; break;
  }
}

struct SubjectTraits {
  double eeg_gain;
  std::array<double, kEegChannels> channel_gain;
  double hr_offset_bpm;
  double gsr_tonic;
  double face_scale;
  Point2 face_origin;
  std::vector<double> embed_base;
};

SubjectTraits draw_subject(std::uint64_t seed, int subject) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(subject), 0x5eedu};
  Rng rng(ss);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SubjectTraits t;
  t.eeg_gain = 0.8 + 0.45 * u(rng);
  for (auto& g : t.channel_gain) g = 0.85 + 0.3 * u(rng);
  t.hr_offset_bpm = -5.0 + 10.0 * u(rng);
  t.gsr_tonic = 2.0 + 8.0 * u(rng);
  t.face_scale = 180.0 + 40.0 * u(rng);
  t.face_origin = {280.0 + 80.0 * u(rng), 200.0 + 60.0 * u(rng)};
  std::normal_distribution<double> n01(0.0, 1.0);
  t.embed_base.resize(kEmbeddingDim);
  for (auto& v : t.embed_base) v = n01(rng);
  return t;
}

// 14 channels: shared alpha source on O1, O2, P7, P8; frontal beta on
// AF3, F7, F3, F4, F8, AF4; 1/f-like background everywhere.
SignalBlock make_eeg(Rng& rng, std::size_t n, double fs, const SubjectTraits& st, bool alpha_high,
                     bool beta_high) {
  constexpr std::array<double, kEegChannels> kAlphaWeight{0, 0, 0, 0, 0, 0.7, 1.0, 1.0, 0.7, 0, 0, 0, 0, 0};
  constexpr std::array<double, kEegChannels> kBetaWeight{1.0, 0.7, 0.9, 0, 0, 0, 0, 0, 0, 0, 0, 0.9, 0.7, 1.0};
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const double alpha_amp = alpha_high ? 14.0 : 4.0;
  const double beta_amp = beta_high ? 6.0 : 2.0;
  const double alpha_f = 9.5 + u(rng), alpha_ph = kTwoPi * u(rng), alpha_mod = kTwoPi * u(rng);
  const double beta_f = 18.0 + 4.0 * u(rng), beta_ph = kTwoPi * u(rng);

  SignalBlock s;
  s.modality = Modality::EEG;
  s.sample_rate_hz = fs;
  s.samples.assign(kEegChannels, std::vector<double>(n));
  std::vector<double> alpha(n), beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double env = 1.0 + 0.3 * std::sin(kTwoPi * 0.1 * t + alpha_mod);
    alpha[i] = alpha_amp * env * std::sin(kTwoPi * alpha_f * t + alpha_ph);
    beta[i] = beta_amp * std::sin(kTwoPi * beta_f * t + beta_ph);
  }
  for (std::size_t c = 0; c < kEegChannels; ++c) {
    auto& x = s.samples[c];
    const double theta_f = 5.0 + 1.5 * u(rng), theta_ph = kTwoPi * u(rng);
    const double gain = st.eeg_gain * st.channel_gain[c];
    double ar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      ar = 0.95 * ar + 2.5 * n01(rng);
      const double v = ar + 1.5 * n01(rng) + 3.0 * std::sin(kTwoPi * theta_f * t + theta_ph) +
                       kAlphaWeight[c] * alpha[i] + kBetaWeight[c] * beta[i];
      x[i] = q2(gain * v);
    }
  }
  return s;
}

// Two leads of a beat train: narrow R wave plus a T wave 0.22 s later.
SignalBlock make_ecg(Rng& rng, std::size_t n, double fs, const SubjectTraits& st, bool jitter_high) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double bpm = (jitter_high ? 80.0 : 66.0) + st.hr_offset_bpm;
  const double rr_mean = 60.0 / bpm;
  const double rr_sd = jitter_high ? 0.060 : 0.015;
  const double duration = static_cast<double>(n) / fs;

  std::vector<double> beats;
  for (double t = 0.3 * u(rng); t < duration + 1.0;) {
    beats.push_back(t);
    t += std::max(0.56, rr_mean + rr_sd * n01(rng));
  }
  SignalBlock s;
  s.modality = Modality::ECG;
  s.sample_rate_hz = fs;
  s.samples.assign(kEcgChannels, std::vector<double>(n, 0.0));
  constexpr std::array<double, 2> kLeadGain{1.0, 0.6};
  const double wander_ph = kTwoPi * u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v = 0.0;
    // beats near t only
    auto it = std::lower_bound(beats.begin(), beats.end(), t - 0.6);
    for (; it != beats.end() && *it < t + 0.2; ++it) {
      const double dr = (t - *it) / 0.012;
      const double dt = (t - *it - 0.22) / 0.04;
      v += 1000.0 * std::exp(-0.5 * dr * dr) + 300.0 * std::exp(-0.5 * dt * dt);
    }
    const double wander = 40.0 * std::sin(kTwoPi * 0.2 * t + wander_ph);
    for (std::size_t c = 0; c < kEcgChannels; ++c) {
      s.samples[c][i] = q2(kLeadGain[c] * v + wander + 10.0 * n01(rng));
    }
  }
  return s;
}

// Tonic level plus skin-conductance responses at a Poisson rate.
SignalBlock make_gsr(Rng& rng, std::size_t n, double fs, const SubjectTraits& st, bool responsive) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double mean_gap = responsive ? 5.0 : 25.0;
  const double amp_lo = responsive ? 0.3 : 0.08, amp_hi = responsive ? 0.7 : 0.2;
  std::exponential_distribution<double> gap(1.0 / mean_gap);
  const double duration = static_cast<double>(n) / fs;

  std::vector<std::pair<double, double>> scr;  // onset, amplitude
  for (double t = gap(rng); t < duration; t += std::max(1.5, gap(rng))) {
    scr.emplace_back(t, amp_lo + (amp_hi - amp_lo) * u(rng));
  }
  SignalBlock s;
  s.modality = Modality::GSR;
  s.sample_rate_hz = fs;
  s.samples.assign(1, std::vector<double>(n));
  const double drift = (u(rng) - 0.5) * 0.004;
  constexpr double kRise = 0.7, kDecay = 3.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v = st.gsr_tonic + drift * t;
    for (const auto& [onset, amp] : scr) {
      if (onset > t) break;
      const double d = t - onset;
      if (d > 8.0 * kDecay) continue;
      v += amp * (1.0 - std::exp(-d / kRise)) * std::exp(-d / kDecay) * 1.8;
    }
    s.samples[0][i] = q2(v * 100.0 + 0.5 * n01(rng)) / 100.0;
  }
  return s;
}

// Neutral 49-point template in face-box units (x right, y down, origin at
// the top-left of the box): 1-10 brows, 11-19 nose, 20-31 eyes, 32-49 lips.
std::array<Point2, kLandmarkPoints> template_points() {
  return {{
      // left brow, outer to inner
      {0.10, 0.10}, {0.17, 0.05}, {0.25, 0.03}, {0.33, 0.05}, {0.41, 0.09},
      // right brow, inner to outer
      {0.59, 0.09}, {0.67, 0.05}, {0.75, 0.03}, {0.83, 0.05}, {0.90, 0.10},
      // nose bridge and tip
      {0.50, 0.20}, {0.50, 0.30}, {0.50, 0.40}, {0.50, 0.50},
      // nostrils, left to right
      {0.40, 0.56}, {0.45, 0.58}, {0.50, 0.59}, {0.55, 0.58}, {0.60, 0.56},
      // left eye: outer corner, upper, upper, inner corner, lower, lower
      {0.15, 0.24}, {0.22, 0.20}, {0.30, 0.20}, {0.37, 0.24}, {0.30, 0.28}, {0.22, 0.28},
      // right eye: inner corner, upper, upper, outer corner, lower, lower
      {0.63, 0.24}, {0.70, 0.20}, {0.78, 0.20}, {0.85, 0.24}, {0.78, 0.28}, {0.70, 0.28},
      // outer lip: left corner, upper (3), right corner, lower (5)
      {0.30, 0.75}, {0.37, 0.71}, {0.44, 0.69}, {0.50, 0.70}, {0.56, 0.69}, {0.63, 0.71},
      {0.70, 0.75}, {0.63, 0.81}, {0.56, 0.84}, {0.50, 0.85}, {0.44, 0.84}, {0.37, 0.81},
      // inner lip: left, upper centre, right, right lower, lower centre, left lower
      {0.35, 0.75}, {0.50, 0.73}, {0.65, 0.75}, {0.58, 0.77}, {0.50, 0.78}, {0.42, 0.77},
  }};
}

std::vector<LandmarkFrame> make_landmarks(Rng& rng, double duration, const SubjectTraits& st, bool smile,
                                          bool brow_up) {
  static const auto kTemplate = template_points();
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double smile_level = smile ? 0.8 : 0.1;
  const double brow_level = brow_up ? 0.8 : 0.1;
  const double phase = kTwoPi * u(rng);

  std::vector<LandmarkFrame> frames;
  const int n_frames = static_cast<int>(std::floor(duration));
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int k = 0; k < n_frames; ++k) {
    const double t = k;
    const double sm = std::clamp(smile_level + 0.15 * std::sin(0.3 * t + phase) + 0.1 * n01(rng), 0.0, 1.2);
    const double br = std::clamp(brow_level + 0.15 * std::cos(0.2 * t + phase) + 0.1 * n01(rng), 0.0, 1.2);
    const double scale = st.face_scale * (1.0 + 0.01 * n01(rng));
    const Point2 origin{st.face_origin.x + 2.0 * n01(rng), st.face_origin.y + 2.0 * n01(rng)};
    LandmarkFrame f;
    f.t_s = t;
    f.points.resize(kLandmarkPoints);
    for (std::size_t p = 0; p < kLandmarkPoints; ++p) {
      Point2 q = kTemplate[p];
      const int idx = static_cast<int>(p) + 1;
      if (idx <= 10) q.y -= 0.05 * br;  // brows rise
      if (idx >= 32) {
        const double dx = q.x - 0.5;
        q.x += dx * 0.25 * sm;                            // mouth widens
        q.y -= 0.04 * sm * std::min(1.0, std::abs(dx) / 0.2);  // corners lift
      }
      f.points[p] = {q2(origin.x + scale * q.x + 0.4 * n01(rng)), q2(origin.y + scale * q.y + 0.4 * n01(rng))};
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<EmbeddingFrame> make_embeddings(Rng& rng, double duration, double stride, const SubjectTraits& st,
                                            bool high, std::uint64_t seed) {
  // Class direction shared by all subjects.
  static thread_local std::uint64_t dir_seed = ~0ull;
  static thread_local std::vector<double> direction;
  if (dir_seed != seed) {
    Rng drng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> n01(0.0, 1.0);
    direction.resize(kEmbeddingDim);
    for (auto& v : direction) v = n01(drng);
    dir_seed = seed;
  }
  std::normal_distribution<double> n01(0.0, 1.0);
  const double sign = high ? 0.5 : -0.5;
  std::vector<EmbeddingFrame> frames;
  for (double t = 0.0; t < std::floor(duration); t += stride) {
    EmbeddingFrame f;
    f.t_s = t;
    f.vector.resize(kEmbeddingDim);
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
      f.vector[i] = q2(st.embed_base[i] + sign * direction[i] + 0.5 * n01(rng));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace

Dataset generate_synthetic_dataset(int n_subjects, int n_videos, std::uint64_t seed, const LabelPlan& plan) {
  if (n_subjects < 1 || n_videos < 1) throw std::invalid_argument("synth: need at least 1 subject and 1 video");
  if (!(plan.rate_hz > 0.0) || !(plan.min_duration_s > 1.0) || plan.max_duration_s < plan.min_duration_s) {
    throw std::invalid_argument("synth: invalid rate or duration range");
  }
  if (plan.missing_rate < 0.0 || plan.missing_rate >= 1.0) throw std::invalid_argument("synth: missing_rate in [0,1)");
  if (!(plan.embedding_stride_s > 0.0)) throw std::invalid_argument("synth: embedding_stride_s must be positive");

  Dataset d;
  d.trials.reserve(static_cast<std::size_t>(n_subjects) * static_cast<std::size_t>(n_videos));
  for (int s = 1; s <= n_subjects; ++s) {
    const SubjectTraits st = draw_subject(seed, s);
    for (int v = 1; v <= n_videos; ++v) {
      std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(v)};
      Rng rng(ss);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::bernoulli_distribution coin(0.5);

      Classes signal, rated;
      for (auto& h : signal.high) h = coin(rng);
      rated = signal;
      if (plan.random_labels) {
        for (auto& h : rated.high) h = coin(rng);
      }

      TrialRecord t;
      t.subject_id = pad_id('s', s, n_subjects);
      t.video_id = pad_id('v', v, n_videos);
      for (int dim = 0; dim < 4; ++dim) {
        const auto [pre, post] = draw_rating(rng, rated.high[static_cast<std::size_t>(dim)]);
        set_dim(t.ratings_pre, dim, pre);
        set_dim(t.ratings_post, dim, post);
      }
      const double duration =
          q2(plan.min_duration_s + (plan.max_duration_s - plan.min_duration_s) * u(rng));
      t.duration_s = duration;
      const auto n = static_cast<std::size_t>(std::llround(duration * plan.rate_hz));
      const bool drop_ecg = u(rng) < plan.missing_rate, drop_gsr = u(rng) < plan.missing_rate;
      const bool drop_lm = u(rng) < plan.missing_rate, drop_emb = u(rng) < plan.missing_rate;

      t.eeg = make_eeg(rng, n, plan.rate_hz, st, signal.of(plan.eeg_alpha), signal.of(plan.eeg_beta));
      auto ecg = make_ecg(rng, n, plan.rate_hz, st, signal.of(plan.ecg_jitter));
      if (!drop_ecg) t.ecg = std::move(ecg);
      auto gsr = make_gsr(rng, n, plan.rate_hz, st, signal.of(plan.gsr_peaks));
      if (!drop_gsr) t.gsr = std::move(gsr);
      auto lm = make_landmarks(rng, duration, st, signal.of(plan.face_mouth), signal.of(plan.face_brow));
      if (!drop_lm) t.landmarks = std::move(lm);
      if (plan.embeddings) {
        auto emb = make_embeddings(rng, duration, plan.embedding_stride_s, st, signal.of(plan.face_embedding), seed);
        if (!drop_emb) t.face_embeddings = std::move(emb);
      }
      d.trials.push_back(std::move(t));
    }
  }
  return d;
}

}  // namespace affect::synth
