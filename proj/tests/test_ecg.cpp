#include "affect/ecg_features.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace affect;
using namespace affect::ecg;

namespace {

constexpr double kRate = 128.0;

// Narrow R waves at the given beat times with an optional T wave after each.
std::vector<double> beats(const std::vector<double>& times_s, double total_s, double t_delay_s = 0.0,
                          double t_height = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(total_s * kRate), 0.0);
  auto bump = [&](double centre, double height, double sigma) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = static_cast<double>(i) / kRate - centre;
      if (std::abs(d) < 6 * sigma) x[i] += height * std::exp(-0.5 * d * d / (sigma * sigma));
    }
  };
  for (double t : times_s) {
    bump(t, 1000.0, 0.01);
    if (t_height > 0) bump(t + t_delay_s, t_height, 0.04);
  }
  return x;
}

std::vector<double> spike_train(const std::vector<std::size_t>& idx, std::size_t n) {
  std::vector<double> x(n, 0.0);
  for (auto i : idx) x[i] = 1000.0;
  return x;
}

SignalBlock two_lead(const std::vector<double>& a, const std::vector<double>& b) {
  SignalBlock s;
  s.modality = Modality::ECG;
  s.sample_rate_hz = kRate;
  s.samples = {a, b};
  return s;
}

std::vector<double> rr_beat_times(double mean_s, double sd_s, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mean_s, sd_s);
  std::vector<double> t{1.0};
  for (int i = 1; i < n; ++i) t.push_back(t.back() + std::max(0.6, g(rng)));
  return t;
}

}  // namespace

TEST(CleanEcg, ConstantUnchangedAndLengthPreserved) {
  const std::vector<double> x(500, 3.25);
  const auto y = clean_ecg(x, kRate);
  ASSERT_EQ(y.size(), x.size());
  for (double v : y) EXPECT_DOUBLE_EQ(v, 3.25);
}

TEST(CleanEcg, IsolatedSpikeAttenuated) {
  std::vector<double> x(600, 0.0);
  x[300] = 640.0;
  const auto y = clean_ecg(x, kRate);
  EXPECT_LE(*std::max_element(y.begin(), y.end()), 640.0 / (0.25 * kRate) + 1e-12);
}

TEST(ExtractRr, OneHertzSpikeTrain) {
  std::vector<std::size_t> idx;
  for (int k = 0; k < 60; ++k) idx.push_back(64 + 128 * static_cast<std::size_t>(k));
  const auto rr = extract_rr(spike_train(idx, 60 * 128 + 64), kRate);
  ASSERT_EQ(rr.intervals_ms.size(), 59u);
  for (double v : rr.intervals_ms) EXPECT_DOUBLE_EQ(v, 1000.0);
}

TEST(ExtractRr, AlternatingSpacing) {
  std::vector<double> t{0.5};
  for (int k = 1; k < 40; ++k) t.push_back(t.back() + (k % 2 ? 0.8 : 0.86));
  const auto rr = extract_rr(beats(t, t.back() + 1.0), kRate);
  ASSERT_EQ(rr.intervals_ms.size(), 39u);
  const double one_sample = 1000.0 / kRate;
  for (std::size_t i = 0; i < rr.intervals_ms.size(); ++i) {
    EXPECT_NEAR(rr.intervals_ms[i], i % 2 ? 860.0 : 800.0, one_sample + 1e-9) << i;
  }
  EXPECT_EQ(pnn50(rr), 1.0);
}

TEST(ExtractRr, TWavesDoNotAddPeaks) {
  std::vector<double> t;
  for (int k = 0; k < 30; ++k) t.push_back(0.5 + k);
  const auto rr = extract_rr(beats(t, 31.0, 0.3, 600.0), kRate);
  ASSERT_EQ(rr.intervals_ms.size(), 29u);
  for (double v : rr.intervals_ms) EXPECT_NEAR(v, 1000.0, 1000.0 / kRate + 1e-9);
}

TEST(ExtractRr, IntervalsRespectRefractoryPeriod) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 200.0);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = beats(rr_beat_times(0.7, 0.2, 40, static_cast<std::uint64_t>(trial)), 40.0);
    for (auto& v : x) v += g(rng);
    for (double v : extract_rr(x, kRate).intervals_ms) EXPECT_GE(v, 500.0);
  }
}

TEST(ExtractRr, AmplitudeScalingInvariant) {
  auto x = beats(rr_beat_times(0.8, 0.05, 30, 9), 30.0, 0.25, 300.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 20.0);
  for (auto& v : x) v += g(rng);
  const auto base = extract_rr(x, kRate).intervals_ms;
  ASSERT_GT(base.size(), 10u);
  for (double a : {0.001, 0.5, 4.0, 1e3}) {
    auto y = x;
    for (auto& v : y) v *= a;
    EXPECT_EQ(extract_rr(y, kRate).intervals_ms, base) << a;
  }
}

TEST(ExtractRr, FlatSignalHasNoIntervals) {
  EXPECT_TRUE(extract_rr(std::vector<double>(1000, 1.0), kRate).intervals_ms.empty());
}

TEST(Pnn50, Examples) {
  EXPECT_EQ(pnn50({{800, 860, 800, 860}}), 1.0);
  EXPECT_EQ(pnn50({{800, 840, 800}}), 0.0);
  EXPECT_EQ(pnn50({{900, 900, 900, 900}}), 0.0);
  EXPECT_EQ(pnn50({{800, 851}}), 1.0);
  EXPECT_EQ(pnn50({{800, 850}}), 0.0);
  EXPECT_FALSE(pnn50({{800}}).has_value());
  EXPECT_FALSE(pnn50({}).has_value());
}

TEST(Pnn50, TimeReversalInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(600, 1000);
  for (int t = 0; t < 50; ++t) {
    RrSeries rr;
    for (int i = 0; i < 20; ++i) rr.intervals_ms.push_back(std::round(u(rng)));
    RrSeries rev{{rr.intervals_ms.rbegin(), rr.intervals_ms.rend()}};
    EXPECT_EQ(pnn50(rr), pnn50(rev));
  }
}

TEST(EcgFeatures, TwoNamedFeatures) {
  const auto x = beats(rr_beat_times(0.8, 0.06, 30, 2), 30.0);
  const auto f = ecg_features(two_lead(x, x));
  ASSERT_TRUE(f.has_value());
  ASSERT_EQ(f->size(), 2u);
  EXPECT_EQ(f->names, (std::vector<std::string>{"pnn50_ch1", "pnn50_ch2"}));
  EXPECT_EQ(f->values[0], f->values[1]);
}

TEST(EcgFeatures, JitterExceedsMetronome) {
  const auto jit = beats(rr_beat_times(0.8, 0.12, 60, 4), 60.0);
  const auto met = beats(rr_beat_times(0.8, 0.005, 60, 4), 60.0);
  const auto fj = ecg_features(two_lead(jit, jit));
  const auto fm = ecg_features(two_lead(met, met));
  ASSERT_TRUE(fj && fm);
  EXPECT_GT(fj->values[0], fm->values[0]);
  EXPECT_GT(fj->values[1], fm->values[1]);
}

TEST(EcgFeatures, DegenerateChannelOmitsTrial) {
  const auto x = beats(rr_beat_times(0.8, 0.06, 30, 2), 30.0);
  EXPECT_FALSE(ecg_features(two_lead(x, std::vector<double>(x.size(), 0.0))).has_value());
}

TEST(EcgFeatures, RejectsWrongChannelCount) {
  SignalBlock s = two_lead(std::vector<double>(100), std::vector<double>(100));
  s.samples.pop_back();
  EXPECT_THROW(ecg_features(s), std::invalid_argument);
}
