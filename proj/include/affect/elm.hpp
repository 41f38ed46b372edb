#pragma once

#include "affect/transforms.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace affect::elm {

// Single-hidden-layer network with random sigmoid features and ridge
// least-squares output weights.
struct ElmModel {
  Eigen::Index input_dim{0};
  Eigen::Index hidden_dim{0};
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> input_weights;  // L x d
  Vector biases;           // L
  Matrix output_weights;   // L x C
  std::vector<int> classes;  // ascending
  double ridge_lambda{0.0};
  std::uint64_t seed{0};
  ZScoreModel feature_normalizer;
};

struct Prediction {
  std::vector<int> labels;
  Matrix scores;  // n x C, columns follow ElmModel::classes
};

ElmModel elm_train(const Matrix& X, const std::vector<int>& y, Eigen::Index hidden, double ridge_lambda,
                   std::uint64_t seed);

// Same as elm_train but with an explicit class list (must contain every
// label in y); used where some classes can be absent from a training fold.
ElmModel elm_train_with_classes(const Matrix& X, const std::vector<int>& y, const std::vector<int>& classes,
                                Eigen::Index hidden, double ridge_lambda, std::uint64_t seed);

Prediction elm_predict(const ElmModel& m, const Matrix& X);

// H = sigmoid(normalise(X) W^T + b), n x L.
Matrix elm_hidden(const ElmModel& m, const Matrix& X);

// Row-wise argmax, ties to the lower column.
std::vector<int> argmax_rows(const Matrix& scores, const std::vector<int>& classes);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// One-hot targets (1 for the class column, 0 elsewhere).
Matrix one_hot(const std::vector<int>& y, const std::vector<int>& classes);

// Solves (H^T H + lambda I) B = H^T T, switching to the equivalent n x n
// system H^T (H H^T + lambda I)^-1 T when L > n.
Matrix solve_output_weights(const Matrix& H, const Matrix& T, double ridge_lambda);

struct Grid {
  std::vector<Eigen::Index> hidden{100, 250, 500, 1000};
  std::vector<double> lambdas{1e-6, 1e-3, 1e-1, 1.0};
};

struct GridPoint {
  Eigen::Index hidden{0};
  double lambda{0.0};
  double mean_accuracy{0.0};
};

struct CvReport {
  std::vector<double> fold_accuracies;  // for the chosen point
  double mean_accuracy{0.0};
  Eigen::Index chosen_hidden{0};
  double chosen_lambda{0.0};
  bool stratified{true};
  std::vector<GridPoint> grid;
  std::vector<std::string> warnings;
};

// Fold index per sample: stratified round-robin over per-class shuffles, or
// a plain shuffle when a class has fewer than k members.
std::vector<int> assign_folds(const std::vector<int>& y, int k, std::uint64_t seed, bool* stratified = nullptr);

// Picks (L, lambda) maximising mean fold accuracy; ties go to smaller L,
// then smaller lambda. The same seed drives folds and hidden weights.
CvReport cross_validate(const Matrix& X, const std::vector<int>& y, const Grid& grid, int k = 10,
                        std::uint64_t seed = 1);

void to_json(nlohmann::json& j, const ElmModel& m);
void from_json(const nlohmann::json& j, ElmModel& m);
void save_model(const ElmModel& m, const std::filesystem::path& path);
ElmModel load_model(const std::filesystem::path& path);

std::uint64_t hash_model(const ElmModel& m);

}  // namespace affect::elm
