#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace freeconv::kernels {

// Data-parallel inner loops used by the measure/spectrum machinery.
// Each kernel has a scalar reference implementation and (on x86-64 /
// aarch64) a SIMD variant selected once at runtime. The two are
// equivalence-tested; callers only see the dispatch table.
//
// resolvent kernels accumulate sums of the form
//   sum_j w_j / (z - x_j),  z = re + i*im,
// split into S1 = sum w*(re-x)/d and S2 = sum w/d with d = (re-x)^2 + im^2,
// so the result is S1 - i*im*S2.

struct Backend {
  const char* name;

  // out[k-1] = sum_j x_j^k for k = 1..kmax
  void (*power_sums)(const double* x, std::size_t n, int kmax, double* out);

  // unit weights: s1 = sum (re-x)/d, s2 = sum 1/d
  void (*resolvent_sum)(const double* x, std::size_t n, double re, double im,
                        double* s1, double* s2);

  // weighted: s1 = sum w*(re-x)/d, s2 = sum w/d
  void (*weighted_resolvent_sum)(const double* x, const double* w,
                                 std::size_t n, double re, double im,
                                 double* s1, double* s2);

  // composite trapezoid with uniform spacing dx over n >= 2 samples
  double (*trapezoid)(const double* y, std::size_t n, double dx);
};

/// Scalar reference backend (always available).
const Backend& scalar_backend();

/// Backend selected for this process (AVX2/NEON when supported, else scalar).
const Backend& active_backend();

/// Backends compiled into this binary and usable on this CPU.
std::vector<const Backend*> available_backends();

/// Force a specific backend by name ("scalar", "avx2", "neon").
/// Returns false if it is not available on this machine.
bool force_backend(std::string_view name);

// -- convenience wrappers over the active backend --

inline std::vector<double> power_sums(std::span<const double> x, int kmax) {
  std::vector<double> out(static_cast<std::size_t>(kmax), 0.0);
  if (!x.empty() && kmax > 0)
    active_backend().power_sums(x.data(), x.size(), kmax, out.data());
  return out;
}

inline std::complex<double> resolvent_sum(std::span<const double> x,
                                          std::complex<double> z) {
  double s1 = 0.0, s2 = 0.0;
  if (!x.empty())
    active_backend().resolvent_sum(x.data(), x.size(), z.real(), z.imag(), &s1,
                                   &s2);
  return {s1, -z.imag() * s2};
}

inline std::complex<double> weighted_resolvent_sum(std::span<const double> x,
                                                   std::span<const double> w,
                                                   std::complex<double> z) {
  double s1 = 0.0, s2 = 0.0;
  if (!x.empty())
    active_backend().weighted_resolvent_sum(x.data(), w.data(), x.size(),
                                            z.real(), z.imag(), &s1, &s2);
  return {s1, -z.imag() * s2};
}

inline double trapezoid(std::span<const double> y, double dx) {
  if (y.size() < 2) return 0.0;
  return active_backend().trapezoid(y.data(), y.size(), dx);
}

}  // namespace freeconv::kernels
