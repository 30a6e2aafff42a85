#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "freeconv/errors.hpp"

namespace freeconv {

// One-dimensional probability measures in the four concrete forms the
// pipelines use. All representations are immutable after construction and
// normalized/validated by the factory functions.

struct Atomic {
  std::vector<double> locations;  // strictly increasing
  std::vector<double> weights;    // in (0,1], sum to 1 within 1e-12
};

struct GridDensity {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> values;  // nonnegative, trapezoid integral 1 within 1e-9
  std::vector<double> cum;     // cumulative trapezoid integral at grid nodes
};

struct Semicircle {
  double t = 1.0;  // variance, > 0
};

struct Empirical {
  std::vector<double> samples;  // sorted ascending, equal weights
};

class Measure {
 public:
  static Measure atomic(std::vector<double> locations,
                        std::vector<double> weights);
  static Measure point_mass(double c);
  /// Values are normalized so the trapezoid integral is exactly 1.
  static Measure grid_density(double lo, double hi, std::vector<double> values);
  static Measure grid_from_function(double lo, double hi, int m,
                                    const std::function<double(double)>& f);
  static Measure uniform(double lo, double hi, int m = kDefaultGridSize);
  static Measure semicircle(double t);
  static Measure empirical(std::vector<double> samples);

  /// Default grid resolution; keeps quadrature moment error below ~1e-6
  /// for k <= 8 on smooth densities.
  static constexpr int kDefaultGridSize = 4096;

  const std::variant<Atomic, GridDensity, Semicircle, Empirical>& rep() const {
    return rep_;
  }

  double cdf(double x) const;
  /// Point mass of {x}; zero for the density variants.
  double mass_at(double x) const;
  /// inf{y : p <= F(y)} for p in (0,1]; bisection to 1e-12 on the
  /// continuous variants, left endpoint at plateaus.
  double quantile(double p) const;
  /// m_1..m_kmax; exact power sums for atoms/samples, closed form for the
  /// semicircle, trapezoid quadrature for grid densities.
  std::vector<double> moments(int kmax) const;

  double support_lo() const;
  double support_hi() const;

  nlohmann::json to_json() const;
  static Measure from_json(const nlohmann::json& j);

 private:
  explicit Measure(std::variant<Atomic, GridDensity, Semicircle, Empirical> rep)
      : rep_(std::move(rep)) {}
  std::variant<Atomic, GridDensity, Semicircle, Empirical> rep_;
};

/// Density of the semicircle law with variance t:
/// sqrt(4t - x^2) / (2 pi t) on |x| <= 2 sqrt(t), zero outside.
double semicircle_density(double t, double x);

/// CDF of the semicircle law with variance t.
double semicircle_cdf(double t, double x);

/// Sup distance between CDFs, evaluated on the union of both measures'
/// atoms plus a fixed 2048-point grid spanning both supports (left limits
/// included at jumps).
double ks_distance(const Measure& a, const Measure& b);

/// The rescaled quantile map: quantile_r(mu, x) =
///   inf{y : |x|/pi <= mu(-inf, y]} / (2^{3/2} pi)  for 0 < |x| < pi,
/// and 0 at x = 0 and |x| >= pi. The law of 2^{3/2} pi * quantile_r(mu, U)
/// with U uniform on (-pi, pi) is mu itself.
double quantile_r(const Measure& mu, double x);

/// Evaluation wrapper for quantile_r carrying its source measure.
class QuantileFunctionR {
 public:
  explicit QuantileFunctionR(Measure mu) : mu_(std::move(mu)) {}
  double operator()(double x) const { return quantile_r(mu_, x); }
  const Measure& source() const { return mu_; }

 private:
  Measure mu_;
};

// 2^{3/2} pi, the normalization shared by quantile_r and its pushforward.
inline constexpr double kQuantileScale =
    2.0 * std::numbers::sqrt2 * std::numbers::pi;

}  // namespace freeconv
