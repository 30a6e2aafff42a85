#include "freeconv/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "freeconv/kernels.hpp"
#include "freeconv/nc.hpp"

namespace freeconv {

namespace {

constexpr double kPi = std::numbers::pi;

double grid_dx(const GridDensity& g) {
  return (g.hi - g.lo) / static_cast<double>(g.values.size() - 1);
}

}  // namespace

Measure Measure::atomic(std::vector<double> locations,
                        std::vector<double> weights) {
  if (locations.empty() || locations.size() != weights.size())
    throw ValidationError("atomic: locations/weights size mismatch");
  for (std::size_t i = 0; i + 1 < locations.size(); ++i)
    if (!(locations[i] < locations[i + 1]))
      throw ValidationError("atomic: locations must be strictly increasing");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || w > 1.0)
      throw ValidationError("atomic: weights must lie in (0,1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError("atomic: weights must sum to 1 within 1e-12");
  return Measure(Atomic{std::move(locations), std::move(weights)});
}

Measure Measure::point_mass(double c) { return atomic({c}, {1.0}); }

Measure Measure::grid_density(double lo, double hi, std::vector<double> values) {
  if (!(lo < hi)) throw ValidationError("grid: lo < hi required");
  if (values.size() < 2) throw ValidationError("grid: need at least 2 values");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("grid: density values must be nonnegative");
  const double dx = (hi - lo) / static_cast<double>(values.size() - 1);
  double integral = kernels::trapezoid(values, dx);
  if (!(integral > 0.0)) throw ValidationError("grid: density integrates to 0");
  if (std::abs(integral - 1.0) > 1e-13)
    for (double& v : values) v /= integral;

  GridDensity g;
  g.lo = lo;
  g.hi = hi;
  g.values = std::move(values);
  g.cum.resize(g.values.size());
  g.cum[0] = 0.0;
  for (std::size_t i = 1; i < g.values.size(); ++i)
    g.cum[i] = g.cum[i - 1] + 0.5 * (g.values[i - 1] + g.values[i]) * dx;
  return Measure(std::move(g));
}

Measure Measure::grid_from_function(double lo, double hi, int m,
                                    const std::function<double(double)>& f) {
  if (m < 2) throw ValidationError("grid: m must be >= 2");
  std::vector<double> v(static_cast<std::size_t>(m));
  const double dx = (hi - lo) / (m - 1);
  for (int i = 0; i < m; ++i)
    v[static_cast<std::size_t>(i)] = std::max(0.0, f(lo + i * dx));
  return grid_density(lo, hi, std::move(v));
}

Measure Measure::uniform(double lo, double hi, int m) {
  return grid_from_function(lo, hi, m, [&](double) { return 1.0 / (hi - lo); });
}

Measure Measure::semicircle(double t) {
  if (!(t > 0.0)) throw ValidationError("semicircle: t must be positive");
  return Measure(Semicircle{t});
}

Measure Measure::empirical(std::vector<double> samples) {
  if (samples.empty()) throw ValidationError("empirical: no samples");
  std::sort(samples.begin(), samples.end());
  return Measure(Empirical{std::move(samples)});
}

double semicircle_density(double t, double x) {
  if (!(t > 0.0)) throw ValidationError("semicircle_density: t must be positive");
  const double s = 4.0 * t - x * x;
  if (s <= 0.0) return 0.0;
  return std::sqrt(s) / (2.0 * kPi * t);
}

double semicircle_cdf(double t, double x) {
  const double edge = 2.0 * std::sqrt(t);
  if (x <= -edge) return 0.0;
  if (x >= edge) return 1.0;
  return 0.5 + x * std::sqrt(4.0 * t - x * x) / (4.0 * kPi * t) +
         std::asin(x / edge) / kPi;
}

double Measure::cdf(double x) const {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Atomic>) {
          double f = 0.0;
          for (std::size_t i = 0;
               i < rep.locations.size() && rep.locations[i] <= x; ++i)
            f += rep.weights[i];
          return f;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          if (x <= rep.lo) return 0.0;
          if (x >= rep.hi) return 1.0;
          const double dx = grid_dx(rep);
          const auto i = static_cast<std::size_t>((x - rep.lo) / dx);
          const std::size_t j = std::min(i, rep.values.size() - 2);
          const double s = (x - (rep.lo + static_cast<double>(j) * dx)) / dx;
          const double rho0 = rep.values[j];
          const double rho1 = rep.values[j + 1];
          return std::min(
              1.0, rep.cum[j] + dx * (rho0 * s + 0.5 * (rho1 - rho0) * s * s));
        } else if constexpr (std::is_same_v<T, Semicircle>) {
          return semicircle_cdf(rep.t, x);
        } else {
          const auto& s = rep.samples;
          auto it = std::upper_bound(s.begin(), s.end(), x);
          return static_cast<double>(it - s.begin()) /
                 static_cast<double>(s.size());
        }
      },
      rep_);
}

double Measure::mass_at(double x) const {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Atomic>) {
          for (std::size_t i = 0; i < rep.locations.size(); ++i)
            if (rep.locations[i] == x) return rep.weights[i];
          return 0.0;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          auto [a, b] = std::equal_range(rep.samples.begin(), rep.samples.end(), x);
          return static_cast<double>(b - a) /
                 static_cast<double>(rep.samples.size());
        } else {
          return 0.0;
        }
      },
      rep_);
}

double Measure::quantile(double p) const {
  if (!(p > 0.0) || p > 1.0)
    throw ValidationError("quantile: p must lie in (0,1]");
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Atomic>) {
          double cum = 0.0;
          for (std::size_t i = 0; i < rep.locations.size(); ++i) {
            cum += rep.weights[i];
            if (cum + 1e-12 >= p) return rep.locations[i];
          }
          return rep.locations.back();
        } else if constexpr (std::is_same_v<T, Empirical>) {
          const auto n = static_cast<double>(rep.samples.size());
          auto idx = static_cast<std::ptrdiff_t>(std::ceil(p * n - 1e-9)) - 1;
          idx = std::clamp<std::ptrdiff_t>(
              idx, 0, static_cast<std::ptrdiff_t>(rep.samples.size()) - 1);
          return rep.samples[static_cast<std::size_t>(idx)];
        } else {
          // Leftmost point with F(y) >= p; F is monotone, so lower-bound
          // bisection lands on the infimum even across plateaus.
          double lo = support_lo(), hi = support_hi();
          while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            if (cdf(mid) >= p)
              hi = mid;
            else
              lo = mid;
          }
          return hi;
        }
      },
      rep_);
}

std::vector<double> Measure::moments(int kmax) const {
  if (kmax < 1) throw ValidationError("moments: kmax must be >= 1");
  return std::visit(
      [&](const auto& rep) -> std::vector<double> {
        using T = std::decay_t<decltype(rep)>;
        std::vector<double> m(static_cast<std::size_t>(kmax), 0.0);
        if constexpr (std::is_same_v<T, Atomic>) {
          for (std::size_t i = 0; i < rep.locations.size(); ++i) {
            double p = 1.0;
            for (int k = 0; k < kmax; ++k) {
              p *= rep.locations[i];
              m[static_cast<std::size_t>(k)] += rep.weights[i] * p;
            }
          }
          return m;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          m = kernels::power_sums(rep.samples, kmax);
          for (double& v : m) v /= static_cast<double>(rep.samples.size());
          return m;
        } else if constexpr (std::is_same_v<T, Semicircle>) {
          for (int j = 1; 2 * j <= kmax; ++j)
            m[static_cast<std::size_t>(2 * j) - 1] =
                static_cast<double>(catalan(j)) * std::pow(rep.t, j);
          return m;
        } else {
          const double dx = grid_dx(rep);
          std::vector<double> xpow(rep.values.size());
          std::vector<double> integrand(rep.values.size());
          for (std::size_t i = 0; i < xpow.size(); ++i) xpow[i] = 1.0;
          for (int k = 1; k <= kmax; ++k) {
            for (std::size_t i = 0; i < xpow.size(); ++i) {
              xpow[i] *= rep.lo + static_cast<double>(i) * dx;
              integrand[i] = xpow[i] * rep.values[i];
            }
            m[static_cast<std::size_t>(k) - 1] =
                kernels::trapezoid(integrand, dx);
          }
          return m;
        }
      },
      rep_);
}

double Measure::support_lo() const {
  return std::visit(
      [](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Atomic>) return rep.locations.front();
        else if constexpr (std::is_same_v<T, GridDensity>) return rep.lo;
        else if constexpr (std::is_same_v<T, Semicircle>) return -2.0 * std::sqrt(rep.t);
        else return rep.samples.front();
      },
      rep_);
}

double Measure::support_hi() const {
  return std::visit(
      [](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Atomic>) return rep.locations.back();
        else if constexpr (std::is_same_v<T, GridDensity>) return rep.hi;
        else if constexpr (std::is_same_v<T, Semicircle>) return 2.0 * std::sqrt(rep.t);
        else return rep.samples.back();
      },
      rep_);
}

double ks_distance(const Measure& a, const Measure& b) {
  std::vector<double> pts;
  for (const Measure* m : {&a, &b}) {
    std::visit(
        [&](const auto& rep) {
          using T = std::decay_t<decltype(rep)>;
          if constexpr (std::is_same_v<T, Atomic>)
            pts.insert(pts.end(), rep.locations.begin(), rep.locations.end());
          else if constexpr (std::is_same_v<T, Empirical>)
            pts.insert(pts.end(), rep.samples.begin(), rep.samples.end());
        },
        m->rep());
  }
  const double lo = std::min(a.support_lo(), b.support_lo());
  const double hi = std::max(a.support_hi(), b.support_hi());
  constexpr int kGrid = 2048;
  const double dx = (hi - lo) / (kGrid - 1);
  for (int i = 0; i < kGrid; ++i) pts.push_back(lo + i * dx);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  double sup = 0.0;
  for (double x : pts) {
    const double fa = a.cdf(x), fb = b.cdf(x);
    sup = std::max(sup, std::abs(fa - fb));
    const double ja = a.mass_at(x), jb = b.mass_at(x);
    if (ja > 0.0 || jb > 0.0)
      sup = std::max(sup, std::abs((fa - ja) - (fb - jb)));
  }
  return std::min(sup, 1.0);
}

double quantile_r(const Measure& mu, double x) {
  if (std::abs(x) > kPi * (1.0 + 1e-12))
    throw std::domain_error("quantile_r: |x| must be <= pi");
  const double ax = std::abs(x);
  if (ax == 0.0 || ax >= kPi) return 0.0;
  return mu.quantile(ax / kPi) / kQuantileScale;
}

nlohmann::json Measure::to_json() const {
  return std::visit(
      [](const auto& rep) -> nlohmann::json {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Atomic>) {
          return {{"kind", "atomic"},
                  {"locations", rep.locations},
                  {"weights", rep.weights}};
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          return {{"kind", "grid"},
                  {"lo", rep.lo},
                  {"hi", rep.hi},
                  {"m", rep.values.size()},
                  {"values", rep.values}};
        } else if constexpr (std::is_same_v<T, Semicircle>) {
          return {{"kind", "semicircle"}, {"t", rep.t}};
        } else {
          return {{"kind", "empirical"}, {"samples", rep.samples}};
        }
      },
      rep_);
}

Measure Measure::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atomic")
    return atomic(j.at("locations").get<std::vector<double>>(),
                  j.at("weights").get<std::vector<double>>());
  if (kind == "grid")
    return grid_density(j.at("lo").get<double>(), j.at("hi").get<double>(),
                        j.at("values").get<std::vector<double>>());
  if (kind == "semicircle") return semicircle(j.at("t").get<double>());
  if (kind == "empirical")
    return empirical(j.at("samples").get<std::vector<double>>());
  throw ValidationError("measure: unknown kind '" + kind + "'");
}

}  // namespace freeconv
