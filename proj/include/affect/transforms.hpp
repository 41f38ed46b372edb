#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <vector>

namespace affect {

// Rows are observations.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct PcaModel {
  Vector mean;                 // d
  Matrix components;           // k x d, orthonormal rows
  Vector explained_variance;   // k, descending, sample (n - 1) normalization

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index output_dim() const { return components.rows(); }
  bool fitted() const { return components.rows() > 0; }
};

// Top-k principal directions of the mean-centred rows of X. Each component's
// largest-magnitude coordinate is made positive.
PcaModel pca_fit(const Matrix& X, Eigen::Index k);
Matrix pca_transform(const PcaModel& m, const Matrix& X);
Matrix pca_inverse(const PcaModel& m, const Matrix& Y);

struct ZScoreModel {
  Vector mean;
  Vector std;                   // zero-variance columns hold 1
  std::vector<bool> degenerate; // true where the fitted column was constant

  Eigen::Index dim() const { return mean.size(); }
};

ZScoreModel zscore_fit(const Matrix& X);
Matrix zscore_apply(const ZScoreModel& m, const Matrix& X);

void to_json(nlohmann::json& j, const PcaModel& m);
void from_json(const nlohmann::json& j, PcaModel& m);
void to_json(nlohmann::json& j, const ZScoreModel& m);
void from_json(const nlohmann::json& j, ZScoreModel& m);

// Order-sensitive FNV-1a over the exact bit patterns; used to compare fitted
// parameters across runs.
std::uint64_t hash_matrix(const Matrix& m, std::uint64_t seed = 1469598103934665603ull);
std::uint64_t hash_model(const PcaModel& m);
std::uint64_t hash_model(const ZScoreModel& m);

}  // namespace affect
