// Compiled with -mavx2 -mfma; only reached after a CPUID check in dispatch.cpp.
#include "affect/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace affect::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// exp(x) by range reduction x = k ln2 + r, |r| <= ln2/2, and a degree-12
// Taylor polynomial in r. Inputs are clamped to [-708, 708].
inline __m256d exp_avx2(__m256d x) {
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d inv_ln2 = _mm256_set1_pd(1.44269504088896338700e+00);
  x = _mm256_max_pd(_mm256_min_pd(x, _mm256_set1_pd(708.0)), _mm256_set1_pd(-708.0));

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, inv_ln2),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  static constexpr double c[] = {
      1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,     1.0 / 120.0,
      1.0 / 24.0,        1.0 / 6.0,        0.5,             1.0,
      1.0};
  __m256d p = _mm256_set1_pd(c[0]);
  for (int j = 1; j < 13; ++j) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[j]));

  // 2^k through the exponent field.
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i e = _mm256_cvtepi32_epi64(k32);
  e = _mm256_add_epi64(e, _mm256_set1_epi64x(1023));
  e = _mm256_slli_epi64(e, 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(e));
}

void sigmoid_avx2(double* v, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d e = exp_avx2(_mm256_sub_pd(zero, x));
    _mm256_storeu_pd(v + i, _mm256_div_pd(one, _mm256_add_pd(one, e)));
  }
  for (; i < n; ++i) v[i] = 1.0 / (1.0 + std::exp(-v[i]));
}

void center_window_avx2(const double* x, const double* w, double offset, double* out,
                        std::size_t n) {
  const __m256d vo = _mm256_set1_pd(offset);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vo);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(d, _mm256_loadu_pd(w + i)));
  }
  for (; i < n; ++i) out[i] = (x[i] - offset) * w[i];
}

void accumulate_power_avx2(const double* z, double* acc, std::size_t n_bins) {
  std::size_t k = 0;
  for (; k + 4 <= n_bins; k += 4) {
    const __m256d a = _mm256_loadu_pd(z + 2 * k);      // re0 im0 re1 im1
    const __m256d b = _mm256_loadu_pd(z + 2 * k + 4);  // re2 im2 re3 im3
    const __m256d a2 = _mm256_mul_pd(a, a);
    const __m256d b2 = _mm256_mul_pd(b, b);
    // hadd gives [a0+a1, b0+b1, a2+a3, b2+b3] = bins [0, 2, 1, 3]
    const __m256d h = _mm256_hadd_pd(a2, b2);
    const __m256d ordered = _mm256_permute4x64_pd(h, 0b11011000);
    _mm256_storeu_pd(acc + k, _mm256_add_pd(_mm256_loadu_pd(acc + k), ordered));
  }
  for (; k < n_bins; ++k) {
    const double re = z[2 * k];
    const double im = z[2 * k + 1];
    acc[k] += re * re + im * im;
  }
}

void central_moments_avx2(const double* x, std::size_t n, double c, double out[3]) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  __m256d s4 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
    const __m256d d2 = _mm256_mul_pd(d, d);
    s2 = _mm256_add_pd(s2, d2);
    s3 = _mm256_fmadd_pd(d2, d, s3);
    s4 = _mm256_fmadd_pd(d2, d2, s4);
  }
  double m2 = hsum(s2), m3 = hsum(s3), m4 = hsum(s4);
  for (; i < n; ++i) {
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

const KernelTable* avx2_kernels_impl() {
  static const KernelTable table{
      "avx2",           dot_avx2,
      axpy_avx2,        sigmoid_avx2,
      center_window_avx2, accumulate_power_avx2,
      central_moments_avx2,
  };
  return &table;
}

}  // namespace affect::simd

#else

namespace affect::simd {
const KernelTable* avx2_kernels_impl() { return nullptr; }
}  // namespace affect::simd

#endif
