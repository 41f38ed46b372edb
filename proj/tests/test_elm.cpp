#include "affect/elm.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

using namespace affect;
using namespace affect::elm;

namespace {

struct Data {
  Matrix X;
  std::vector<int> y;
};

Data xor_data() {
  Data d{Matrix(4, 2), {0, 1, 1, 0}};
  d.X << 0, 0, 0, 1, 1, 0, 1, 1;
  return d;
}

// Two isotropic unit-variance blobs whose centres are `sep` apart.
Data blobs(int n, double sep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Data d{Matrix(n, 2), std::vector<int>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    const int c = i % 2;
    d.y[static_cast<std::size_t>(i)] = c;
    d.X(i, 0) = g(rng) + (c ? sep / 2 : -sep / 2);
    d.X(i, 1) = g(rng);
  }
  return d;
}

Data rows(const Data& d, int begin, int end) {
  return {d.X.middleRows(begin, end - begin),
          std::vector<int>(d.y.begin() + begin, d.y.begin() + end)};
}

Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(rng);
  }
  return m;
}

}  // namespace

TEST(Elm, XorTrainsToPerfectAccuracy) {
  const Data d = xor_data();
  const ElmModel m = elm_train(d.X, d.y, 20, 1e-6, 1);
  const Prediction p = elm_predict(m, d.X);
  EXPECT_EQ(p.labels, d.y);
  EXPECT_EQ(accuracy(p.labels, d.y), 1.0);
  EXPECT_EQ(p.scores.rows(), 4);
  EXPECT_EQ(p.scores.cols(), 2);
}

TEST(Elm, TrainingIsBitIdentical) {
  const Data d = blobs(60, 3.0, 2);
  EXPECT_EQ(hash_model(elm_train(d.X, d.y, 50, 1e-3, 7)), hash_model(elm_train(d.X, d.y, 50, 1e-3, 7)));
  EXPECT_NE(hash_model(elm_train(d.X, d.y, 50, 1e-3, 7)), hash_model(elm_train(d.X, d.y, 50, 1e-3, 8)));
}

TEST(Elm, ModelShapesAndWeightRange) {
  const Data d = blobs(40, 3.0, 3);
  const ElmModel m = elm_train(d.X, d.y, 30, 1e-3, 1);
  EXPECT_EQ(m.input_dim, 2);
  EXPECT_EQ(m.hidden_dim, 30);
  EXPECT_EQ(m.input_weights.rows(), 30);
  EXPECT_EQ(m.input_weights.cols(), 2);
  EXPECT_EQ(m.biases.size(), 30);
  EXPECT_EQ(m.output_weights.rows(), 30);
  EXPECT_EQ(m.output_weights.cols(), 2);
  EXPECT_EQ(m.classes, (std::vector<int>{0, 1}));
  EXPECT_EQ(m.feature_normalizer.dim(), 2);
  EXPECT_LE(m.input_weights.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(m.biases.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_TRUE(m.output_weights.allFinite());
}

TEST(Elm, RejectsBadInput) {
  const Data d = xor_data();
  EXPECT_ANY_THROW(elm_train(d.X, {1, 1, 1, 1}, 10, 1e-3, 1));
  EXPECT_ANY_THROW(elm_train(d.X, {0, 1, 1}, 10, 1e-3, 1));
  EXPECT_ANY_THROW(elm_train(d.X, d.y, 0, 1e-3, 1));
  EXPECT_ANY_THROW(elm_train(d.X, d.y, 10, -1.0, 1));
  Matrix bad = d.X;
  bad(2, 1) = std::nan("");
  EXPECT_ANY_THROW(elm_train(bad, d.y, 10, 1e-3, 1));
  const ElmModel m = elm_train(d.X, d.y, 10, 1e-3, 1);
  EXPECT_ANY_THROW(elm_predict(m, Matrix::Zero(2, 3)));
}

TEST(Elm, SingularWithoutRidgeExplainsFix) {
  Matrix X(10, 2);
  std::vector<int> y(10);
  for (int i = 0; i < 10; ++i) {
    X.row(i) << (i % 2), (i % 2);
    y[static_cast<std::size_t>(i)] = i % 2;
  }
  try {
    elm_train(X, y, 5, 0.0, 1);
    FAIL() << "expected singular-system error";
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("singular"), std::string::npos) << msg;
    EXPECT_NE(msg.find("ridge_lambda > 0"), std::string::npos) << msg;
  }
  EXPECT_NO_THROW(elm_train(X, y, 5, 1e-6, 1));
}

TEST(Elm, SeparableBlobsHeldOut) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Data all = blobs(400, 6.0, 100 + seed);
    const Data train = rows(all, 0, 200), test = rows(all, 200, 400);
    const ElmModel m = elm_train(train.X, train.y, 100, 1e-3, seed);
    EXPECT_GE(accuracy(elm_predict(m, test.X).labels, test.y), 0.95) << "seed " << seed;
  }
}

TEST(Elm, MulticlassLabelsNeedNotBeContiguous) {
  Data d = blobs(90, 8.0, 4);
  for (int i = 0; i < 90; ++i) {
    const int c = i % 3;
    d.X(i, 1) += c == 2 ? 8.0 : 0.0;
    d.y[static_cast<std::size_t>(i)] = c == 0 ? 3 : (c == 1 ? 7 : 11);
    if (c == 2) d.X(i, 0) = d.X(i, 0) - (i % 2 ? 4.0 : -4.0);
  }
  const ElmModel m = elm_train(d.X, d.y, 60, 1e-3, 1);
  EXPECT_EQ(m.classes, (std::vector<int>{3, 7, 11}));
  for (int l : elm_predict(m, d.X).labels) EXPECT_TRUE(l == 3 || l == 7 || l == 11);
}

TEST(OutputWeights, NormalEquationResidual) {
  for (auto [n, L] : {std::pair{50, 20}, std::pair{20, 50}, std::pair{100, 100}, std::pair{7, 200}}) {
    for (double lambda : {1e-6, 1e-3, 1.0}) {
      const Matrix H = random_matrix(n, L, static_cast<std::uint64_t>(n * 1000 + L));
      const Matrix T = random_matrix(n, 3, static_cast<std::uint64_t>(n + L));
      const Matrix B = solve_output_weights(H, T, lambda);
      const Matrix HtT = H.transpose() * T;
      const Matrix r = (H.transpose() * H + lambda * Matrix::Identity(L, L)) * B - HtT;
      EXPECT_LE(r.norm(), 1e-6 * HtT.norm()) << "n=" << n << " L=" << L << " lambda=" << lambda;
    }
  }
}

TEST(OutputWeights, NormNonIncreasingInLambda) {
  for (auto [n, L] : {std::pair{40, 15}, std::pair{15, 40}}) {
    const Matrix H = random_matrix(n, L, 9);
    const Matrix T = random_matrix(n, 2, 10);
    double prev = 1e300;
    for (double lambda : {1e-8, 1e-6, 1e-4, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
      const double b = solve_output_weights(H, T, lambda).norm();
      EXPECT_LE(b, prev * (1 + 1e-9));
      prev = b;
    }
  }
}

TEST(Predict, ArgmaxTiesGoToEarlierClass) {
  Matrix s(3, 3);
  s << 1, 1, 0, 0, 2, 2, 5, 5, 5;
  EXPECT_EQ(argmax_rows(s, {4, 6, 9}), (std::vector<int>{4, 6, 4}));
}

TEST(Predict, ArgmaxInvariantUnderPositiveRescaling) {
  const Matrix s = random_matrix(50, 4, 11).array() - 0.5;
  const std::vector<int> classes{0, 1, 2, 3};
  const auto base = argmax_rows(s, classes);
  for (double f : {1e-3, 0.5, 2.0, 1e4}) EXPECT_EQ(argmax_rows(s * f, classes), base);
}

TEST(Predict, DuplicatedRowsPredictIdentically) {
  const Data d = blobs(40, 3.0, 12);
  const ElmModel m = elm_train(d.X, d.y, 30, 1e-3, 1);
  Matrix X(4, 2);
  X << d.X.row(0), d.X.row(0), d.X.row(5), d.X.row(5);
  const Prediction p = elm_predict(m, X);
  EXPECT_EQ(p.labels[0], p.labels[1]);
  EXPECT_EQ(p.labels[2], p.labels[3]);
  EXPECT_EQ(p.scores.row(0), p.scores.row(1));
  const Prediction q = elm_predict(m, X);
  EXPECT_EQ(p.scores, q.scores);
}

TEST(Predict, OneHotTargets) {
  const Matrix t = one_hot({2, 0, 2}, {0, 2});
  Matrix e(3, 2);
  e << 0, 1, 1, 0, 0, 1;
  EXPECT_EQ(t, e);
}

TEST(Folds, SizesDifferByAtMostOne) {
  for (int n : {10, 23, 57, 100}) {
    for (int k : {2, 3, 10}) {
      std::vector<int> y(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = (i * 7) % 3 == 0 ? 1 : 0;
      bool strat = false;
      const auto f = assign_folds(y, k, 5, &strat);
      std::vector<int> sizes(static_cast<std::size_t>(k), 0);
      for (int v : f) {
        ASSERT_GE(v, 0);
        ASSERT_LT(v, k);
        ++sizes[static_cast<std::size_t>(v)];
      }
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      EXPECT_LE(*hi - *lo, 1) << "n=" << n << " k=" << k;
      EXPECT_EQ(f, assign_folds(y, k, 5));
    }
  }
}

TEST(Folds, StratifiedKeepsClassBalance) {
  std::vector<int> y(100);
  for (int i = 0; i < 100; ++i) y[static_cast<std::size_t>(i)] = i < 30 ? 1 : 0;
  bool strat = false;
  const auto f = assign_folds(y, 10, 3, &strat);
  EXPECT_TRUE(strat);
  std::vector<int> ones(10, 0);
  for (int i = 0; i < 100; ++i) ones[static_cast<std::size_t>(f[static_cast<std::size_t>(i)])] += y[static_cast<std::size_t>(i)];
  for (int c : ones) EXPECT_EQ(c, 3);
}

TEST(CrossValidate, LeaveOneOutOnSeparablePairs) {
  Matrix X(4, 1);
  X << 0.0, 0.1, 1.0, 1.1;
  const CvReport r = cross_validate(X, {0, 0, 1, 1}, Grid{{20}, {1e-6}}, 4, 1);
  EXPECT_EQ(r.fold_accuracies.size(), 4u);
  EXPECT_EQ(r.mean_accuracy, 1.0);
}

TEST(CrossValidate, SinglePointGrid) {
  const Data d = blobs(60, 4.0, 13);
  const CvReport r = cross_validate(d.X, d.y, Grid{{37}, {0.01}}, 10, 2);
  EXPECT_EQ(r.chosen_hidden, 37);
  EXPECT_EQ(r.chosen_lambda, 0.01);
  EXPECT_EQ(r.fold_accuracies.size(), 10u);
  EXPECT_TRUE(r.stratified);
  const double mean = std::accumulate(r.fold_accuracies.begin(), r.fold_accuracies.end(), 0.0) / 10.0;
  EXPECT_NEAR(r.mean_accuracy, mean, 1e-12);
}

TEST(CrossValidate, FallsBackWhenClassTooSmall) {
  Data d = blobs(40, 4.0, 14);
  for (auto& v : d.y) v = 0;
  d.y[0] = d.y[1] = d.y[2] = 1;
  const CvReport r = cross_validate(d.X, d.y, Grid{{20}, {1e-3}}, 10, 1);
  EXPECT_FALSE(r.stratified);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("non-stratified"), std::string::npos);
}

TEST(CrossValidate, TiesPreferSmallerHiddenThenLambda) {
  const Data d = blobs(60, 20.0, 15);
  const CvReport r = cross_validate(d.X, d.y, Grid{{40, 20, 80}, {1e-1, 1e-3}}, 5, 1);
  EXPECT_EQ(r.mean_accuracy, 1.0);
  EXPECT_EQ(r.chosen_hidden, 20);
  EXPECT_EQ(r.chosen_lambda, 1e-3);
  EXPECT_EQ(r.grid.size(), 6u);
}

TEST(CrossValidate, DeterministicGivenSeed) {
  const Data d = blobs(80, 2.0, 16);
  const Grid g{{20, 50}, {1e-3, 1.0}};
  const CvReport a = cross_validate(d.X, d.y, g, 10, 3), b = cross_validate(d.X, d.y, g, 10, 3);
  EXPECT_EQ(a.fold_accuracies, b.fold_accuracies);
  EXPECT_EQ(a.chosen_hidden, b.chosen_hidden);
  EXPECT_EQ(a.chosen_lambda, b.chosen_lambda);
}

TEST(Serialization, RoundTripPreservesPredictionsExactly) {
  const Data d = blobs(100, 2.0, 17);
  const ElmModel m = elm_train(d.X, d.y, 80, 1e-3, 5);
  const auto path = std::filesystem::temp_directory_path() / "affect_elm_roundtrip.json";
  save_model(m, path);
  const ElmModel r = load_model(path);
  std::filesystem::remove(path);
  EXPECT_EQ(hash_model(m), hash_model(r));
  const Matrix probe = random_matrix(50, 2, 18).array() * 8.0 - 4.0;
  const Prediction a = elm_predict(m, probe), b = elm_predict(r, probe);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(r.classes, m.classes);
  EXPECT_EQ(r.seed, m.seed);
  EXPECT_EQ(r.ridge_lambda, m.ridge_lambda);
}

TEST(Serialization, RejectsMalformed) {
  const auto path = std::filesystem::temp_directory_path() / "affect_elm_bad.json";
  {
    std::ofstream(path) << R"({"format":"affect-elm/1","input_dim":2})";
  }
  EXPECT_ANY_THROW(load_model(path));
  std::filesystem::remove(path);
  EXPECT_ANY_THROW(load_model(path));
}
