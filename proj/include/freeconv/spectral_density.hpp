#pragma once

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "freeconv/measure.hpp"

namespace freeconv {

/// Summation taper applied to the truncated Fourier series of sqrt(r) when
/// compiling a separable density for sampling. The Fejer and Jackson kernels
/// are nonnegative with unit mass, so the smoothed sqrt(r) stays within
/// [ess inf sqrt r, ess sup sqrt r]; squaring then keeps the compiled density
/// above the declared essential lower bound of r. Raw truncation converges
/// faster in smooth regions but guarantees only nonnegativity (of the square).
enum class Taper { kRaw, kFejer, kJackson };

/// Even nonnegative trigonometric polynomial on [-pi,pi]^2 with real
/// coefficients a_{j,k} = a_{-j,-k}; f(x,y) = sum a_{j,k} e^{i(jx+ky)}.
struct TrigPoly {
  int degree = 0;            // n
  std::vector<double> coef;  // (2n+1)^2 row-major, index (j+n)*(2n+1)+(k+n)
};

/// f(x,y) = r(x) r(y) with r tabulated at uniform midpoints of [-pi, pi].
/// lower_bound is a known essential lower bound of r (0 when unknown).
struct SeparableR {
  std::vector<double> r;
  double lower_bound = 0.0;
};

/// Band-limited separable form f(x,y) = q(x) q(y) with q an even nonnegative
/// trig polynomial, q(x) = coef[0] + 2 sum_k coef[k] cos(kx). This is what
/// the field sampler consumes.
struct SeparablePoly {
  std::vector<double> coef;  // q_0 .. q_n
  double min_value = 0.0;    // fine-grid minimum of q
  double lift = 0.0;         // constant added to coef[0] to restore a bound
};

class SpectralDensity2D;

/// base + alpha. alpha may be negative only via minus_constant(), which
/// validates that the result stays nonnegative.
struct Shifted {
  std::shared_ptr<const SpectralDensity2D> base;
  double alpha = 0.0;
};

class SpectralDensity2D {
 public:
  using Rep = std::variant<TrigPoly, SeparableR, SeparablePoly, Shifted>;

  /// Validates coefficient symmetry and nonnegativity (512x512 grid).
  static SpectralDensity2D trig_poly(int degree, std::vector<double> coef);
  static SpectralDensity2D constant(double c);
  /// f = r (x) r built from the quantile map of mu; delta > 0 declares
  /// mu([delta, inf)) = 1 and records the bound r >= delta / (2^{3/2} pi).
  static SpectralDensity2D separable_from_measure(const Measure& mu,
                                                  double delta = 0.0,
                                                  int table_size = 8192);
  static SpectralDensity2D separable_tabulated(std::vector<double> r,
                                               double lower_bound = 0.0);
  static SpectralDensity2D shifted(SpectralDensity2D base, double alpha);
  /// f - alpha; requires alpha <= min f (grid-checked).
  static SpectralDensity2D minus_constant(SpectralDensity2D base, double alpha);

  const Rep& rep() const { return rep_; }

  double value(double x, double y) const;

  /// Covariance of the stationary field at lag (u,v):
  ///   integral over [-pi,pi]^2 of e^{i(ux+vy)} f(x,y) dx dy.
  /// Exactly 4 pi^2 a_{-u,-v} for trig polynomials, a product of 1-d
  /// quadratures for tabulated separable densities, and base plus
  /// 4 pi^2 alpha at lag (0,0) for shifted densities.
  double covariance(int u, int v) const;

  /// g(x,y) = (f(x,y) + f(y,x)) / 2. Identity for separable forms.
  SpectralDensity2D symmetrize() const;

  /// Lower estimate of ess inf [f(x,y) + f(y,x)]: the exact analytic bound
  /// 2 (lower bound of r)^2 for separable densities carrying one, otherwise
  /// a 1024x1024 grid minimum.
  double ess_inf_sym() const;

  /// Degree of the band-limited representation, or nullopt for SeparableR.
  std::optional<int> bandlimit() const;

  /// Compile to a band-limited density ready for exact circulant sampling.
  /// total_degree applies to the SeparableR truncation (half of it to
  /// sqrt(r)); band-limited inputs are returned unchanged.
  SpectralDensity2D bandlimited(int total_degree, Taper taper) const;

  /// Minimum of f over a uniform grid (per axis).
  double min_on_grid(int grid = 512) const;

  /// Spectrum table for circulant embedding of period M:
  /// out[s*M+t] = 4 pi^2 f(x_s, x_t) at FFT frequencies x_s = 2 pi s / M
  /// wrapped to (-pi, pi]. Requires a band-limited density.
  void fill_spectrum(int period, std::vector<double>& out) const;

  nlohmann::json to_json() const;
  static SpectralDensity2D from_json(const nlohmann::json& j);

 private:
  explicit SpectralDensity2D(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

}  // namespace freeconv
