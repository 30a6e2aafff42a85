#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "freeconv/measure.hpp"

namespace freeconv {

/// Closed-form Cauchy transform of the semicircle law with variance t,
/// G(z) = (z - sqrt(z - 2 sqrt t) * sqrt(z + 2 sqrt t)) / (2t), with the
/// factored principal branches so G is continuous from z = i*infinity and
/// G(z) ~ 1/z at infinity.
std::complex<double> semicircle_cauchy(double t, std::complex<double> z);

/// Cauchy transform G_mu(z) = integral of 1/(z - x) d mu(x), Im z > 0.
/// Closed form for semicircle and atoms, power sums for empirical spectra,
/// trapezoid quadrature for grid densities. Precomputes node/weight tables
/// so repeated evaluation (the subordination inner loop) stays cheap.
class CauchyEvaluator {
 public:
  enum class Method { kClosedForm, kAtoms, kPowerSum, kQuadrature };

  explicit CauchyEvaluator(const Measure& mu);

  std::complex<double> operator()(std::complex<double> z) const;
  Method method() const { return method_; }

 private:
  Method method_;
  double t_ = 0.0;            // kClosedForm
  std::vector<double> x_;     // nodes / atoms / samples
  std::vector<double> w_;     // weights (kAtoms, kQuadrature)
  double scale_ = 1.0;        // 1/N for kPowerSum
};

struct SubordinationOptions {
  double tol = 1e-12;
  int maxit = 10000;
};

struct SubordinationResult {
  std::complex<double> g;
  int iterations = 0;
  double residual = 0.0;
};

/// Cauchy transform of mu boxplus semicircle(t) at z (Im z > 0), solving the
/// fixed point G = G_mu(z - t G) by damped iteration from w0 = 1/z. The step
/// is halved whenever the residual grows. Throws ConvergenceError with the
/// last iterate when maxit is exhausted.
SubordinationResult subordinate_semicircle_full(const CauchyEvaluator& gmu,
                                                double t, std::complex<double> z,
                                                const SubordinationOptions& opts = {},
                                                std::complex<double> w0 = {0.0, 0.0});

std::complex<double> subordinate_semicircle(const Measure& mu, double t,
                                            std::complex<double> z,
                                            const SubordinationOptions& opts = {});

/// Density table of mu boxplus semicircle(t), recovered as
/// -Im G(x + i eps) / pi per grid point. Negative values within 1e-10 of
/// zero are clamped; larger negatives and solver failures are recorded
/// per point rather than thrown.
struct DensityProfile {
  std::vector<double> x;
  std::vector<double> density;
  double eps = 1e-4;
  std::vector<int> iterations;
  std::vector<double> residual;
  std::vector<bool> ok;
  std::vector<std::string> failures;  // one message per failed point

  bool all_ok() const;
  /// Trapezoid mass over the (possibly nonuniform) grid.
  double mass() const;
  double max_density() const;
  void write_csv(const std::filesystem::path& path) const;
};

DensityProfile density_of_plus_semicircle(const Measure& mu, double t,
                                          std::span<const double> grid,
                                          double eps,
                                          const SubordinationOptions& opts = {});

/// Atom diagnostic. At each grid point the candidate atom mass is
/// eps * |Im G(x + i eps)| over the eps schedule {1e-2, 1e-3, 1e-4}; for an
/// absolutely continuous measure the estimate shrinks ~10x per decade while
/// at an atom it stalls at the atom mass. A point is flagged when the decay
/// factor drops below `decay_min` (3x per decade separates the two regimes).
struct AtomScanReport {
  std::vector<double> eps_schedule;
  std::vector<std::array<double, 3>> estimates;  // per grid point
  std::vector<std::size_t> flagged;              // indices into the grid
  std::vector<double> grid;
  bool clean() const { return flagged.empty(); }
};

inline constexpr double kAtomDecayMin = 3.0;

/// Scan of the subordination output mu boxplus semicircle(t).
AtomScanReport atom_scan(const DensityProfile& profile, const Measure& mu,
                         double t, double decay_min = kAtomDecayMin);

/// Scan of G_mu itself (no convolution); used as the diagnostic self-test,
/// which must flag genuine atoms of mu.
AtomScanReport atom_scan_measure(const Measure& mu, std::span<const double> grid,
                                 double decay_min = kAtomDecayMin);

}  // namespace freeconv
