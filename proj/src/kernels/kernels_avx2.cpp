// AVX2+FMA variants of the inner-loop kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; it is reached only after the runtime
// CPU check in dispatch.cpp.

#include "freeconv/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace freeconv::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void power_sums_avx2(const double* x, std::size_t n, int kmax, double* out) {
  constexpr int kMax = 16;
  __m256d acc[kMax];
  for (int k = 0; k < kmax; ++k) acc[k] = _mm256_setzero_pd();

  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d xv = _mm256_loadu_pd(x + j);
    __m256d p = xv;
    acc[0] = _mm256_add_pd(acc[0], p);
    for (int k = 1; k < kmax; ++k) {
      p = _mm256_mul_pd(p, xv);
      acc[k] = _mm256_add_pd(acc[k], p);
    }
  }
  for (int k = 0; k < kmax; ++k) out[k] = hsum(acc[k]);

  for (; j < n; ++j) {
    double p = 1.0;
    for (int k = 0; k < kmax; ++k) {
      p *= x[j];
      out[k] += p;
    }
  }
}

void resolvent_sum_avx2(const double* x, std::size_t n, double re, double im,
                        double* s1, double* s2) {
  const __m256d rev = _mm256_set1_pd(re);
  const __m256d im2v = _mm256_set1_pd(im * im);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d a = _mm256_setzero_pd();
  __m256d b = _mm256_setzero_pd();

  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(rev, _mm256_loadu_pd(x + j));
    __m256d d = _mm256_fmadd_pd(dx, dx, im2v);
    __m256d inv = _mm256_div_pd(one, d);
    a = _mm256_fmadd_pd(dx, inv, a);
    b = _mm256_add_pd(b, inv);
  }
  double sa = hsum(a), sb = hsum(b);

  const double im2 = im * im;
  for (; j < n; ++j) {
    double dx = re - x[j];
    double inv = 1.0 / (dx * dx + im2);
    sa += dx * inv;
    sb += inv;
  }
  *s1 = sa;
  *s2 = sb;
}

void weighted_resolvent_sum_avx2(const double* x, const double* w,
                                 std::size_t n, double re, double im,
                                 double* s1, double* s2) {
  const __m256d rev = _mm256_set1_pd(re);
  const __m256d im2v = _mm256_set1_pd(im * im);
  __m256d a = _mm256_setzero_pd();
  __m256d b = _mm256_setzero_pd();

  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(rev, _mm256_loadu_pd(x + j));
    __m256d d = _mm256_fmadd_pd(dx, dx, im2v);
    __m256d q = _mm256_div_pd(_mm256_loadu_pd(w + j), d);
    a = _mm256_fmadd_pd(dx, q, a);
    b = _mm256_add_pd(b, q);
  }
  double sa = hsum(a), sb = hsum(b);

  const double im2 = im * im;
  for (; j < n; ++j) {
    double dx = re - x[j];
    double q = w[j] / (dx * dx + im2);
    sa += dx * q;
    sb += q;
  }
  *s1 = sa;
  *s2 = sb;
}

double trapezoid_avx2(const double* y, std::size_t n, double dx) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 1;
  for (; j + 4 <= n - 1; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(y + j));
  double s = hsum(acc);
  for (; j + 1 < n; ++j) s += y[j];
  return (s + 0.5 * (y[0] + y[n - 1])) * dx;
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend backend{
      "avx2",
      power_sums_avx2,
      resolvent_sum_avx2,
      weighted_resolvent_sum_avx2,
      trapezoid_avx2,
  };
  return backend;
}

}  // namespace freeconv::kernels

#endif  // x86-64
