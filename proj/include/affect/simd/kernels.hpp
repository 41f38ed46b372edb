#pragma once

// Data-parallel inner loops used by the feature extractors and the ELM.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at runtime from CPUID; the
// environment variable AFFECT_SIMD=scalar forces the reference path. Within
// one variant all kernels are deterministic. Across variants results agree to
// rounding (different summation order, FMA contraction, polynomial exp).

#include <cstddef>
#include <string_view>

namespace affect::simd {

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // v[i] = 1 / (1 + exp(-v[i]))
  void (*sigmoid_inplace)(double* v, std::size_t n);

  // out[i] = (x[i] - offset) * w[i]
  void (*center_window)(const double* x, const double* w, double offset, double* out,
                        std::size_t n);

  // acc[k] += re[k]^2 + im[k]^2 for interleaved complex input z = [re0, im0, re1, ...]
  void (*accumulate_power)(const double* z, double* acc, std::size_t n_bins);

  // out = {sum (x-c)^2, sum (x-c)^3, sum (x-c)^4}
  void (*central_moments)(const double* x, std::size_t n, double c, double out[3]);
};

const KernelTable& scalar_kernels();

// nullptr when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

// The table selected for this process.
const KernelTable& active();

}  // namespace affect::simd
