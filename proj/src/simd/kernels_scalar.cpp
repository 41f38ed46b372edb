#include "affect/simd/kernels.hpp"

#include <cmath>

namespace affect::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void sigmoid_scalar(double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 / (1.0 + std::exp(-v[i]));
}

void center_window_scalar(const double* x, const double* w, double offset, double* out,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - offset) * w[i];
}

void accumulate_power_scalar(const double* z, double* acc, std::size_t n_bins) {
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double re = z[2 * k];
    const double im = z[2 * k + 1];
    acc[k] += re * re + im * im;
  }
}

void central_moments_scalar(const double* x, std::size_t n, double c, double out[3]) {
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - c;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  out[0] = m2;
  out[1] = m3;
  out[2] = m4;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",         dot_scalar,
      axpy_scalar,      sigmoid_scalar,
      center_window_scalar, accumulate_power_scalar,
      central_moments_scalar,
  };
  return table;
}

}  // namespace affect::simd
