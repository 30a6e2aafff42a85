// NEON variants (aarch64, where NEON is baseline). Mirrors the scalar
// reference kernels two lanes at a time.

#include "freeconv/kernels.hpp"

#if defined(__aarch64__) || defined(_M_ARM64)

#include <arm_neon.h>

namespace freeconv::kernels {

namespace {

inline double hsum(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

void power_sums_neon(const double* x, std::size_t n, int kmax, double* out) {
  constexpr int kMax = 16;
  float64x2_t acc[kMax];
  for (int k = 0; k < kmax; ++k) acc[k] = vdupq_n_f64(0.0);

  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t xv = vld1q_f64(x + j);
    float64x2_t p = xv;
    acc[0] = vaddq_f64(acc[0], p);
    for (int k = 1; k < kmax; ++k) {
      p = vmulq_f64(p, xv);
      acc[k] = vaddq_f64(acc[k], p);
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

void resolvent_sum_neon(const double* x, std::size_t n, double re, double im,
                        double* s1, double* s2) {
  const float64x2_t rev = vdupq_n_f64(re);
  const float64x2_t im2v = vdupq_n_f64(im * im);
  float64x2_t a = vdupq_n_f64(0.0);
  float64x2_t b = vdupq_n_f64(0.0);

  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t dx = vsubq_f64(rev, vld1q_f64(x + j));
    float64x2_t d = vfmaq_f64(im2v, dx, dx);
    float64x2_t inv = vdivq_f64(vdupq_n_f64(1.0), d);
    a = vfmaq_f64(a, dx, inv);
    b = vaddq_f64(b, inv);
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

void weighted_resolvent_sum_neon(const double* x, const double* w,
                                 std::size_t n, double re, double im,
                                 double* s1, double* s2) {
  const float64x2_t rev = vdupq_n_f64(re);
  const float64x2_t im2v = vdupq_n_f64(im * im);
  float64x2_t a = vdupq_n_f64(0.0);
  float64x2_t b = vdupq_n_f64(0.0);

  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t dx = vsubq_f64(rev, vld1q_f64(x + j));
    float64x2_t d = vfmaq_f64(im2v, dx, dx);
    float64x2_t q = vdivq_f64(vld1q_f64(w + j), d);
    a = vfmaq_f64(a, dx, q);
    b = vaddq_f64(b, q);
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

double trapezoid_neon(const double* y, std::size_t n, double dx) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t j = 1;
  for (; j + 2 <= n - 1; j += 2) acc = vaddq_f64(acc, vld1q_f64(y + j));
  double s = hsum(acc);
  for (; j + 1 < n; ++j) s += y[j];
  return (s + 0.5 * (y[0] + y[n - 1])) * dx;
}

}  // namespace

const Backend& neon_backend() {
  static const Backend backend{
      "neon",
      power_sums_neon,
      resolvent_sum_neon,
      weighted_resolvent_sum_neon,
      trapezoid_neon,
  };
  return backend;
}

}  // namespace freeconv::kernels

#endif  // aarch64
