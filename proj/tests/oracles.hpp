#pragma once

// Independent reference computations used as test oracles. These are
// deliberately naive (direct DFT, map-based histograms, dense eigensolvers)
// and share no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// One-sided Welch density with a periodic Hann window, per-segment mean
// removal and a direct O(n^2) DFT.
struct Psd {
  std::vector<double> freqs;
  std::vector<double> power;
};

inline Psd welch(const std::vector<double>& x, double fs, double window_s, double hop_s) {
  const auto nw = static_cast<std::size_t>(std::llround(window_s * fs));
  const auto nh = static_cast<std::size_t>(std::llround(hop_s * fs));
  const std::size_t nb = nw / 2 + 1;
  std::vector<long double> w(nw);
  long double wss = 0;
  for (std::size_t i = 0; i < nw; ++i) {
    w[i] = 0.5L - 0.5L * std::cos(2.0L * std::numbers::pi_v<long double> * i / nw);
    wss += w[i] * w[i];
  }
  std::vector<long double> acc(nb, 0.0L);
  std::size_t segs = 0;
  for (std::size_t s = 0; s + nw <= x.size(); s += nh) {
    long double m = 0;
    for (std::size_t i = 0; i < nw; ++i) m += x[s + i];
    m /= nw;
    for (std::size_t k = 0; k < nb; ++k) {
      long double re = 0, im = 0;
      for (std::size_t i = 0; i < nw; ++i) {
        const long double v = (x[s + i] - m) * w[i];
        const long double ang = -2.0L * std::numbers::pi_v<long double> * k * i / nw;
        re += v * std::cos(ang);
        im += v * std::sin(ang);
      }
      acc[k] += re * re + im * im;
    }
    ++segs;
  }
  Psd p;
  for (std::size_t k = 0; k < nb; ++k) {
    const bool edge = k == 0 || (nw % 2 == 0 && k == nb - 1);
    p.freqs.push_back(static_cast<double>(k) * fs / nw);
    p.power.push_back(static_cast<double>(acc[k] / (fs * wss * segs) * (edge ? 1 : 2)));
  }
  return p;
}

inline int bin_of(double v, double lo, double hi, int nb) {
  if (!(hi > lo)) return 0;
  const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * nb));
  return std::min(std::max(b, 0), nb - 1);
}

// H(X | Y) = -sum p(x, y) log2 p(x | y) from map-based joint counts.
inline double conditional_entropy(const std::vector<double>& x, const std::vector<double>& y, int nb) {
  const auto [xl, xh] = std::minmax_element(x.begin(), x.end());
  const auto [yl, yh] = std::minmax_element(y.begin(), y.end());
  std::map<std::pair<int, int>, long> joint;
  std::map<int, long> my;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int bx = bin_of(x[i], *xl, *xh, nb), by = bin_of(y[i], *yl, *yh, nb);
    ++joint[{bx, by}];
    ++my[by];
  }
  const double n = static_cast<double>(x.size());
  long double h = 0;
  for (const auto& [k, c] : joint) {
    const long double pxy = c / n;
    const long double px_given_y = static_cast<long double>(c) / my[k.second];
    h -= pxy * std::log2(px_given_y);
  }
  return static_cast<double>(h);
}

inline double entropy(const std::vector<double>& x, int nb) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  std::map<int, long> c;
  for (double v : x) ++c[bin_of(v, *lo, *hi, nb)];
  long double h = 0;
  for (const auto& [b, k] : c) {
    const long double p = static_cast<long double>(k) / x.size();
    h -= p * std::log2(p);
  }
  return static_cast<double>(h);
}

inline std::vector<double> moving_average(const std::vector<double>& x, int w) {
  std::vector<double> out(x.size());
  const long n = static_cast<long>(x.size());
  for (long i = 0; i < n; ++i) {
    double s = 0;
    int c = 0;
    for (long j = i - w / 2; j <= i + (w - 1 - w / 2); ++j) {
      if (j >= 0 && j < n) {
        s += x[static_cast<std::size_t>(j)];
        ++c;
      }
    }
    out[static_cast<std::size_t>(i)] = s / c;
  }
  return out;
}

// Eigenvalues of the sample covariance, descending.
inline Eigen::VectorXd covariance_eigenvalues(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd c = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(X.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  return es.eigenvalues().reverse();
}

inline Eigen::MatrixXd covariance_eigenvectors(const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd c = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(X.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  return es.eigenvectors().rowwise().reverse();
}

// Bilinear sample of a row-major size x size grid at fractional (r, c),
// coordinates clamped to the grid.
inline double bilinear(const std::vector<double>& g, int size, double r, double c) {
  r = std::clamp(r, 0.0, size - 1.0);
  c = std::clamp(c, 0.0, size - 1.0);
  const int r0 = static_cast<int>(std::floor(r)), c0 = static_cast<int>(std::floor(c));
  const int r1 = std::min(r0 + 1, size - 1), c1 = std::min(c0 + 1, size - 1);
  const double fr = r - r0, fc = c - c0;
  auto at = [&](int rr, int cc) { return g[static_cast<std::size_t>(rr) * size + cc]; };
  return (1 - fr) * ((1 - fc) * at(r0, c0) + fc * at(r0, c1)) + fr * ((1 - fc) * at(r1, c0) + fc * at(r1, c1));
}

}  // namespace oracle
