#include "freeconv/kernels.hpp"

namespace freeconv::kernels {

namespace {

void power_sums_scalar(const double* x, std::size_t n, int kmax, double* out) {
  for (int k = 0; k < kmax; ++k) out[k] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double p = 1.0;
    for (int k = 0; k < kmax; ++k) {
      p *= x[j];
      out[k] += p;
    }
  }
}

void resolvent_sum_scalar(const double* x, std::size_t n, double re, double im,
                          double* s1, double* s2) {
  double a = 0.0, b = 0.0;
  const double im2 = im * im;
  for (std::size_t j = 0; j < n; ++j) {
    double dx = re - x[j];
    double inv = 1.0 / (dx * dx + im2);
    a += dx * inv;
    b += inv;
  }
  *s1 = a;
  *s2 = b;
}

void weighted_resolvent_sum_scalar(const double* x, const double* w,
                                   std::size_t n, double re, double im,
                                   double* s1, double* s2) {
  double a = 0.0, b = 0.0;
  const double im2 = im * im;
  for (std::size_t j = 0; j < n; ++j) {
    double dx = re - x[j];
    double q = w[j] / (dx * dx + im2);
    a += dx * q;
    b += q;
  }
  *s1 = a;
  *s2 = b;
}

double trapezoid_scalar(const double* y, std::size_t n, double dx) {
  double s = 0.5 * (y[0] + y[n - 1]);
  for (std::size_t j = 1; j + 1 < n; ++j) s += y[j];
  return s * dx;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{
      "scalar",
      power_sums_scalar,
      resolvent_sum_scalar,
      weighted_resolvent_sum_scalar,
      trapezoid_scalar,
  };
  return backend;
}

}  // namespace freeconv::kernels
