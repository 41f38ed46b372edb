#include "affect/elm.hpp"

#include "affect/error.hpp"
#include "affect/simd/kernels.hpp"
#include "affect/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace affect::elm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

const char* kFormat = "affect-elm/1";

void draw_weights(std::uint64_t seed, Eigen::Index hidden, Eigen::Index dim, RowMatrix& w, Vector& b) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  w.resize(hidden, dim);
  for (Eigen::Index r = 0; r < hidden; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) w(r, c) = u(gen);
  }
  b.resize(hidden);
  for (Eigen::Index r = 0; r < hidden; ++r) b[r] = u(gen);
}

Matrix hidden_layer(const RowMatrix& xn, const RowMatrix& w, const Vector& b) {
  const auto& k = simd::active();
  const Eigen::Index n = xn.rows(), L = w.rows(), d = w.cols();
  RowMatrix h(n, L);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = xn.row(i).data();
    double* hi = h.row(i).data();
    for (Eigen::Index j = 0; j < L; ++j) {
      hi[j] = k.dot(xi, w.row(j).data(), static_cast<std::size_t>(d)) + b[j];
    }
    k.sigmoid_inplace(hi, static_cast<std::size_t>(L));
  }
  return h;
}

void check_finite(const Matrix& X) {
  if (!X.allFinite()) throw std::invalid_argument("ELM: features contain NaN or Inf");
}

[[noreturn]] void singular_error() {
  throw std::runtime_error(
      "ELM: output-weight system is singular with ridge_lambda = 0; use ridge_lambda > 0 (e.g. 1e-6)");
}

// Cholesky of a symmetric positive (semi)definite matrix with diagonal shift.
Eigen::LLT<Matrix> factor(const Matrix& gram, double lambda) {
  Matrix a = gram;
  a.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    if (lambda == 0.0) singular_error();
    throw std::runtime_error("ELM: ridge system factorisation failed");
  }
  if (lambda == 0.0 && llt.rcond() < 1e-13) singular_error();
  return llt;
}

Matrix gram_of(const Matrix& a) {
  // a^T a via a symmetric rank update
  Matrix g = Matrix::Zero(a.cols(), a.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

std::vector<int> sorted_classes(const std::vector<int>& y) {
  std::set<int> s(y.begin(), y.end());
  return {s.begin(), s.end()};
}

nlohmann::json rows_json(const Matrix& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    j.push_back(std::move(row));
  }
  return j;
}

template <typename M>
M rows_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (static_cast<Eigen::Index>(j.size()) != rows) throw DataError(std::string("model: bad row count in ") + what);
  M m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError(std::string("model: bad row in ") + what);
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

Matrix one_hot(const std::vector<int>& y, const std::vector<int>& classes) {
  Matrix t = Matrix::Zero(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(classes.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), y[i]);
    if (it == classes.end() || *it != y[i]) throw std::invalid_argument("one_hot: label not in class list");
    t(static_cast<Eigen::Index>(i), it - classes.begin()) = 1.0;
  }
  return t;
}

Matrix solve_output_weights(const Matrix& H, const Matrix& T, double ridge_lambda) {
  if (ridge_lambda < 0.0 || !std::isfinite(ridge_lambda)) {
    throw std::invalid_argument("ELM: ridge_lambda must be finite and nonnegative");
  }
  const Eigen::Index n = H.rows(), L = H.cols();
  if (L <= n) {
    const auto llt = factor(gram_of(H), ridge_lambda);
    return llt.solve(H.transpose() * T);
  }
  // More hidden units than samples: H^T H has rank <= n < L.
  if (ridge_lambda == 0.0) singular_error();
  const auto llt = factor(gram_of(H.transpose()), ridge_lambda);
  return H.transpose() * llt.solve(T);
}

ElmModel elm_train_with_classes(const Matrix& X, const std::vector<int>& y, const std::vector<int>& classes,
                                Eigen::Index hidden, double ridge_lambda, std::uint64_t seed) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw std::invalid_argument("ELM: X/y length mismatch");
  if (classes.size() < 2) throw std::invalid_argument("ELM: need at least 2 classes");
  if (y.size() < classes.size()) throw std::invalid_argument("ELM: fewer samples than classes");
  if (hidden < 1) throw std::invalid_argument("ELM: hidden_dim must be >= 1");
  if (!std::is_sorted(classes.begin(), classes.end())) throw std::invalid_argument("ELM: class list must be sorted");
  check_finite(X);

  ElmModel m;
  m.input_dim = X.cols();
  m.hidden_dim = hidden;
  m.classes = classes;
  m.ridge_lambda = ridge_lambda;
  m.seed = seed;
  m.feature_normalizer = zscore_fit(X);
  draw_weights(seed, hidden, X.cols(), m.input_weights, m.biases);
  const RowMatrix xn = zscore_apply(m.feature_normalizer, X);
  const Matrix h = hidden_layer(xn, m.input_weights, m.biases);
  m.output_weights = solve_output_weights(h, one_hot(y, classes), ridge_lambda);
  if (!m.output_weights.allFinite()) throw std::runtime_error("ELM: non-finite output weights");
  return m;
}

ElmModel elm_train(const Matrix& X, const std::vector<int>& y, Eigen::Index hidden, double ridge_lambda,
                   std::uint64_t seed) {
  const auto classes = sorted_classes(y);
  if (classes.size() < 2) throw std::invalid_argument("ELM: y must contain at least 2 classes");
  return elm_train_with_classes(X, y, classes, hidden, ridge_lambda, seed);
}

Matrix elm_hidden(const ElmModel& m, const Matrix& X) {
  if (X.cols() != m.input_dim) {
    throw std::invalid_argument("ELM: expected " + std::to_string(m.input_dim) + " features, got " +
                                std::to_string(X.cols()));
  }
  check_finite(X);
  const RowMatrix xn = zscore_apply(m.feature_normalizer, X);
  return hidden_layer(xn, m.input_weights, m.biases);
}

std::vector<int> argmax_rows(const Matrix& scores, const std::vector<int>& classes) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

Prediction elm_predict(const ElmModel& m, const Matrix& X) {
  Prediction p;
  p.scores = elm_hidden(m, X) * m.output_weights;
  p.labels = argmax_rows(p.scores, m.classes);
  return p;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("accuracy: empty or mismatched label vectors");
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

std::vector<int> assign_folds(const std::vector<int>& y, int k, std::uint64_t seed, bool* stratified) {
  if (k < 2) throw std::invalid_argument("cross_validate: k must be >= 2");
  if (y.size() < static_cast<std::size_t>(k)) throw std::invalid_argument("cross_validate: need n >= k");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  bool strat = true;
  for (const auto& [c, idx] : by_class) {
    if (idx.size() < static_cast<std::size_t>(k)) strat = false;
  }
  std::mt19937_64 gen(seed);
  std::vector<std::size_t> order;
  if (strat) {
    for (auto& [c, idx] : by_class) {
      std::shuffle(idx.begin(), idx.end(), gen);
      order.insert(order.end(), idx.begin(), idx.end());
    }
  } else {
    order.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), gen);
  }
  std::vector<int> fold(y.size());
  for (std::size_t p = 0; p < order.size(); ++p) fold[order[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
  if (stratified) *stratified = strat;
  return fold;
}

CvReport cross_validate(const Matrix& X, const std::vector<int>& y, const Grid& grid, int k, std::uint64_t seed) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw std::invalid_argument("cross_validate: X/y mismatch");
  if (grid.hidden.empty() || grid.lambdas.empty()) throw std::invalid_argument("cross_validate: empty grid");
  check_finite(X);
  const auto classes = sorted_classes(y);
  if (classes.size() < 2) throw std::invalid_argument("cross_validate: need at least 2 classes");

  CvReport rep;
  const auto fold = assign_folds(y, k, seed, &rep.stratified);
  if (!rep.stratified) {
    rep.warnings.push_back("a class has fewer than " + std::to_string(k) +
                           " members; using non-stratified folds");
  }

  auto hidden = grid.hidden;
  auto lambdas = grid.lambdas;
  std::sort(hidden.begin(), hidden.end());
  std::sort(lambdas.begin(), lambdas.end());
  const std::size_t nL = hidden.size(), nl = lambdas.size();

  std::vector<RowMatrix> weights(nL);
  std::vector<Vector> biases(nL);
  for (std::size_t a = 0; a < nL; ++a) draw_weights(seed, hidden[a], X.cols(), weights[a], biases[a]);

  // acc[a][b][f]
  std::vector<std::vector<std::vector<double>>> acc(nL, std::vector<std::vector<double>>(nl));
  std::vector<std::vector<bool>> usable(nL, std::vector<bool>(nl, true));

  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> tr, va;
    for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
    if (va.empty() || tr.empty()) continue;
    Matrix xtr(static_cast<Eigen::Index>(tr.size()), X.cols());
    Matrix xva(static_cast<Eigen::Index>(va.size()), X.cols());
    std::vector<int> ytr, yva;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      xtr.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
      ytr.push_back(y[static_cast<std::size_t>(tr[i])]);
    }
    for (std::size_t i = 0; i < va.size(); ++i) {
      xva.row(static_cast<Eigen::Index>(i)) = X.row(va[i]);
      yva.push_back(y[static_cast<std::size_t>(va[i])]);
    }
    const ZScoreModel norm = zscore_fit(xtr);
    const RowMatrix ntr = zscore_apply(norm, xtr);
    const RowMatrix nva = zscore_apply(norm, xva);
    const Matrix t = one_hot(ytr, classes);

    for (std::size_t a = 0; a < nL; ++a) {
      const Matrix htr = hidden_layer(ntr, weights[a], biases[a]);
      const Matrix hva = hidden_layer(nva, weights[a], biases[a]);
      const bool dual = htr.cols() > htr.rows();
      const Matrix gram = dual ? gram_of(htr.transpose()) : gram_of(htr);
      const Matrix rhs = dual ? t : Matrix(htr.transpose() * t);
      const Matrix cross = dual ? Matrix(hva * htr.transpose()) : hva;
      for (std::size_t b = 0; b < nl; ++b) {
        if (!usable[a][b]) continue;
        try {
          if (dual && lambdas[b] == 0.0) singular_error();
          const auto llt = factor(gram, lambdas[b]);
          const Matrix scores = cross * llt.solve(rhs);
          acc[a][b].push_back(accuracy(argmax_rows(scores, classes), yva));
        } catch (const std::runtime_error& e) {
          usable[a][b] = false;
          rep.warnings.push_back("grid point L=" + std::to_string(hidden[a]) + " lambda=" +
                                 text::format_double(lambdas[b]) + " skipped: " + e.what());
        }
      }
    }
  }

  bool chosen = false;
  for (std::size_t a = 0; a < nL; ++a) {
    for (std::size_t b = 0; b < nl; ++b) {
      if (!usable[a][b] || acc[a][b].empty()) continue;
      double s = 0.0;
      for (double v : acc[a][b]) s += v;
      const double mean = s / static_cast<double>(acc[a][b].size());
      rep.grid.push_back({hidden[a], lambdas[b], mean});
      if (!chosen || mean > rep.mean_accuracy) {
        chosen = true;
        rep.mean_accuracy = mean;
        rep.chosen_hidden = hidden[a];
        rep.chosen_lambda = lambdas[b];
        rep.fold_accuracies = acc[a][b];
      }
    }
  }
  if (!chosen) throw std::runtime_error("cross_validate: no usable grid point");
  return rep;
}

void to_json(nlohmann::json& j, const ElmModel& m) {
  j = nlohmann::json{{"format", kFormat},
                     {"input_dim", m.input_dim},
                     {"hidden_dim", m.hidden_dim},
                     {"seed", m.seed},
                     {"classes", m.classes},
                     {"ridge_lambda", m.ridge_lambda},
                     {"normalizer", m.feature_normalizer},
                     {"input_weights", rows_json(m.input_weights)},
                     {"biases", std::vector<double>(m.biases.data(), m.biases.data() + m.biases.size())},
                     {"output_weights", rows_json(m.output_weights)}};
}

void from_json(const nlohmann::json& j, ElmModel& m) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw DataError("model: unsupported format");
    m.input_dim = j.at("input_dim").get<Eigen::Index>();
    m.hidden_dim = j.at("hidden_dim").get<Eigen::Index>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.classes = j.at("classes").get<std::vector<int>>();
    m.ridge_lambda = j.at("ridge_lambda").get<double>();
    m.feature_normalizer = j.at("normalizer").get<ZScoreModel>();
    m.input_weights = rows_from_json<RowMatrix>(j.at("input_weights"), m.hidden_dim, m.input_dim, "input_weights");
    const auto b = j.at("biases").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(b.size()) != m.hidden_dim) throw DataError("model: bad bias length");
    m.biases = Eigen::Map<const Vector>(b.data(), m.hidden_dim);
    m.output_weights = rows_from_json<Matrix>(j.at("output_weights"), m.hidden_dim,
                                              static_cast<Eigen::Index>(m.classes.size()), "output_weights");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  if (m.feature_normalizer.dim() != m.input_dim) throw DataError("model: normalizer dimension mismatch");
}

void save_model(const ElmModel& m, const std::filesystem::path& path) {
  text::write_file(path, nlohmann::json(m).dump() + "\n");
}

ElmModel load_model(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(text::read_file(path)).get<ElmModel>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model " + path.string() + ": " + e.what());
  }
}

std::uint64_t hash_model(const ElmModel& m) {
  std::uint64_t h = hash_matrix(m.input_weights);
  h = hash_matrix(m.biases, h);
  h = hash_matrix(m.output_weights, h);
  h = hash_matrix(m.feature_normalizer.mean, h);
  return hash_matrix(m.feature_normalizer.std, h);
}

}  // namespace affect::elm
