#include "affect/transforms.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace affect {

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index cols_hint = -1) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : std::max<Eigen::Index>(cols_hint, 0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::runtime_error("matrix JSON: ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

nlohmann::json vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::uint64_t fnv(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

PcaModel pca_fit(const Matrix& X, Eigen::Index k) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");
  if (k < 1 || k > std::min(n - 1, d)) {
    throw std::invalid_argument("pca_fit: k=" + std::to_string(k) + " outside [1, min(n-1, d)] = [1, " +
                                std::to_string(std::min(n - 1, d)) + "]");
  }
  PcaModel m;
  m.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - m.mean.transpose();

  // Right singular vectors of the centred data. For wide inputs factor
  // centeredᵀ = QR first so the SVD runs on an n x n core.
  Matrix v_top;
  Vector s;
  if (d > n) {
    Eigen::HouseholderQR<Matrix> qr(centered.transpose());
    const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Matrix> svd(r.transpose(), Eigen::ComputeThinV);
    s = svd.singularValues();
    Matrix padded = Matrix::Zero(d, k);
    padded.topRows(n) = svd.matrixV().leftCols(k);
    v_top = qr.householderQ() * padded;
  } else {
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    s = svd.singularValues();
    v_top = svd.matrixV().leftCols(k);
  }

  m.components = v_top.transpose();
  m.explained_variance.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    m.explained_variance[i] = s[i] * s[i] / static_cast<double>(n - 1);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double a = std::abs(m.components(i, c));
      if (a > best) {
        best = a;
        arg = c;
      }
    }
    if (m.components(i, arg) < 0.0) m.components.row(i) *= -1.0;
  }
  return m;
}

Matrix pca_transform(const PcaModel& m, const Matrix& X) {
  if (!m.fitted()) throw std::invalid_argument("pca_transform: model not fitted");
  if (X.cols() != m.input_dim()) throw std::invalid_argument("pca_transform: column count mismatch");
  return (X.rowwise() - m.mean.transpose()) * m.components.transpose();
}

Matrix pca_inverse(const PcaModel& m, const Matrix& Y) {
  if (Y.cols() != m.output_dim()) throw std::invalid_argument("pca_inverse: column count mismatch");
  return (Y * m.components).rowwise() + m.mean.transpose();
}

ZScoreModel zscore_fit(const Matrix& X) {
  if (X.rows() < 1) throw std::invalid_argument("zscore_fit: no rows");
  ZScoreModel m;
  const Eigen::Index d = X.cols();
  m.mean.resize(d);
  m.std.resize(d);
  m.degenerate.assign(static_cast<std::size_t>(d), false);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto col = X.col(c);
    if (col.minCoeff() == col.maxCoeff()) {
      m.mean[c] = col[0];
      m.std[c] = 1.0;
      m.degenerate[static_cast<std::size_t>(c)] = true;
      continue;
    }
    const double mu = col.mean();
    const double var = (col.array() - mu).square().mean();
    m.mean[c] = mu;
    m.std[c] = std::sqrt(var);
  }
  return m;
}

Matrix zscore_apply(const ZScoreModel& m, const Matrix& X) {
  if (X.cols() != m.dim()) throw std::invalid_argument("zscore_apply: column count mismatch");
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (m.degenerate[static_cast<std::size_t>(c)]) {
      out.col(c).setZero();
    } else {
      out.col(c) = (X.col(c).array() - m.mean[c]) / m.std[c];
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const PcaModel& m) {
  j = {{"mean", vector_json(m.mean)},
       {"components", matrix_json(m.components)},
       {"explained_variance", vector_json(m.explained_variance)}};
}

void from_json(const nlohmann::json& j, PcaModel& m) {
  m.mean = vector_from_json(j.at("mean"));
  m.components = matrix_from_json(j.at("components"), m.mean.size());
  m.explained_variance = vector_from_json(j.at("explained_variance"));
}

void to_json(nlohmann::json& j, const ZScoreModel& m) {
  std::vector<int> deg(m.degenerate.begin(), m.degenerate.end());
  j = {{"mean", vector_json(m.mean)}, {"std", vector_json(m.std)}, {"degenerate", deg}};
}

void from_json(const nlohmann::json& j, ZScoreModel& m) {
  m.mean = vector_from_json(j.at("mean"));
  m.std = vector_from_json(j.at("std"));
  const auto deg = j.at("degenerate").get<std::vector<int>>();
  m.degenerate.assign(deg.begin(), deg.end());
  if (m.std.size() != m.mean.size() || static_cast<Eigen::Index>(m.degenerate.size()) != m.mean.size()) {
    throw std::runtime_error("zscore JSON: inconsistent dimensions");
  }
}

std::uint64_t hash_matrix(const Matrix& m, std::uint64_t seed) {
  const Eigen::Index dims[2] = {m.rows(), m.cols()};
  std::uint64_t h = fnv(dims, sizeof(dims), seed);
  return fnv(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
}

std::uint64_t hash_model(const PcaModel& m) {
  std::uint64_t h = hash_matrix(m.mean);
  h = hash_matrix(m.components, h);
  return hash_matrix(m.explained_variance, h);
}

std::uint64_t hash_model(const ZScoreModel& m) {
  std::uint64_t h = hash_matrix(m.mean);
  return hash_matrix(m.std, h);
}

}  // namespace affect
