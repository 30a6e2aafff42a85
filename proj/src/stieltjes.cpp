#include "freeconv/stieltjes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "freeconv/kernels.hpp"

namespace freeconv {

namespace {

constexpr double kPi = std::numbers::pi;

void require_upper_half(std::complex<double> z, const char* who) {
  if (!(z.imag() > 0.0))
    throw std::domain_error(std::string(who) + ": Im z must be positive");
}

}  // namespace

std::complex<double> semicircle_cauchy(double t, std::complex<double> z) {
  const double edge = 2.0 * std::sqrt(t);
  std::complex<double> root = std::sqrt(z - edge) * std::sqrt(z + edge);
  // (z - root) / (2t) rationalized: stable for |z| >> edge where the
  // direct difference cancels.
  return 2.0 / (z + root);
}

CauchyEvaluator::CauchyEvaluator(const Measure& mu) {
  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Semicircle>) {
          method_ = Method::kClosedForm;
          t_ = rep.t;
        } else if constexpr (std::is_same_v<T, Atomic>) {
          method_ = Method::kAtoms;
          x_ = rep.locations;
          w_ = rep.weights;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          method_ = Method::kPowerSum;
          x_ = rep.samples;
          scale_ = 1.0 / static_cast<double>(rep.samples.size());
        } else {
          method_ = Method::kQuadrature;
          x_.resize(rep.values.size());
          w_.resize(rep.values.size());
          const double dx =
              (rep.hi - rep.lo) / static_cast<double>(rep.values.size() - 1);
          for (std::size_t i = 0; i < x_.size(); ++i) {
            x_[i] = rep.lo + static_cast<double>(i) * dx;
            const bool endpoint = (i == 0 || i + 1 == x_.size());
            w_[i] = rep.values[i] * dx * (endpoint ? 0.5 : 1.0);
          }
        }
      },
      mu.rep());
}

std::complex<double> CauchyEvaluator::operator()(std::complex<double> z) const {
  require_upper_half(z, "cauchy_transform");
  switch (method_) {
    case Method::kClosedForm:
      return semicircle_cauchy(t_, z);
    case Method::kAtoms:
    case Method::kQuadrature:
      return kernels::weighted_resolvent_sum(x_, w_, z);
    case Method::kPowerSum:
    default:
      return scale_ * kernels::resolvent_sum(x_, z);
  }
}

SubordinationResult subordinate_semicircle_full(const CauchyEvaluator& gmu,
                                                double t, std::complex<double> z,
                                                const SubordinationOptions& opts,
                                                std::complex<double> w0) {
  require_upper_half(z, "subordinate_semicircle");
  if (!(t > 0.0))
    throw ValidationError("subordinate_semicircle: t must be positive");

  // Work on the subordination map K(u) = z - t G_mu(u), u = z - t G, which
  // sends the upper half-plane into {Im u >= Im z} and is a hyperbolic
  // contraction there, so plain Picard steps always converge. Near spectral
  // edges and cusps the contraction factor degrades to 1 - O(Im z)^{2/3},
  // so each step first tries the secant extrapolation of the residual
  // R(u) = K(u) - u, accepted only above the Im z floor and only when it
  // strictly reduces the residual; otherwise the Picard step stands.
  const double floor_im = z.imag();
  auto K = [&](std::complex<double> u) { return z - t * gmu(u); };

  std::complex<double> u =
      (w0.imag() < 0.0) ? z - t * w0 : z - t * (1.0 / z);
  if (!(u.imag() >= floor_im)) u = {u.real(), floor_im};
  std::complex<double> r = K(u) - u;
  std::complex<double> u_prev{}, r_prev{};
  bool have_prev = false;
  double resid = std::abs(r);

  for (int it = 1; it <= opts.maxit; ++it) {
    if (resid <= opts.tol * std::min(t, 1.0)) {
      // Candidate G from the refreshed point; report it only if the
      // fixed-point residual in G units is met.
      std::complex<double> g = gmu(u + r);  // = G_mu(K(u))
      std::complex<double> g2 = gmu(z - t * g);
      const double resid_g = std::abs(g2 - g);
      if (resid_g <= opts.tol) return {g, it, resid_g};
    }

    if (have_prev) {
      const std::complex<double> dr = r - r_prev;
      if (std::abs(dr) > 1e-300) {
        const std::complex<double> cand = u - r * (u - u_prev) / dr;
        if (std::isfinite(cand.real()) && std::isfinite(cand.imag()) &&
            cand.imag() >= floor_im) {
          const std::complex<double> rc = K(cand) - cand;
          if (std::abs(rc) < resid) {
            u_prev = u;
            r_prev = r;
            u = cand;
            r = rc;
            resid = std::abs(r);
            continue;
          }
        }
      }
    }
    u_prev = u;
    r_prev = r;
    have_prev = true;
    u += r;  // Picard step: u <- K(u)
    r = K(u) - u;
    resid = std::abs(r);
  }
  throw ConvergenceError("subordinate_semicircle: no convergence", gmu(u),
                         resid / t, opts.maxit);
}

std::complex<double> subordinate_semicircle(const Measure& mu, double t,
                                            std::complex<double> z,
                                            const SubordinationOptions& opts) {
  CauchyEvaluator gmu(mu);
  return subordinate_semicircle_full(gmu, t, z, opts).g;
}

bool DensityProfile::all_ok() const {
  return std::all_of(ok.begin(), ok.end(), [](bool b) { return b; });
}

double DensityProfile::mass() const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (density[i] + density[i + 1]) * (x[i + 1] - x[i]);
  return s;
}

double DensityProfile::max_density() const {
  double m = 0.0;
  for (double d : density) m = std::max(m, d);
  return m;
}

void DensityProfile::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  out << "x,density,eps,iterations,residual\n";
  out.precision(17);
  for (std::size_t i = 0; i < x.size(); ++i)
    out << x[i] << ',' << density[i] << ',' << eps << ',' << iterations[i]
        << ',' << residual[i] << '\n';
}

DensityProfile density_of_plus_semicircle(const Measure& mu, double t,
                                          std::span<const double> grid,
                                          double eps,
                                          const SubordinationOptions& opts) {
  if (!(eps >= 1e-6 && eps <= 1e-1))
    throw ValidationError("density_of_plus_semicircle: eps must be in [1e-6, 1e-1]");

  CauchyEvaluator gmu(mu);
  DensityProfile p;
  p.eps = eps;
  p.x.assign(grid.begin(), grid.end());
  const std::size_t n = p.x.size();
  p.density.assign(n, 0.0);
  p.iterations.assign(n, 0);
  p.residual.assign(n, 0.0);
  p.ok.assign(n, true);

  std::complex<double> warm{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    try {
      auto r = subordinate_semicircle_full(gmu, t, {p.x[i], eps}, opts, warm);
      warm = r.g;
      p.iterations[i] = r.iterations;
      p.residual[i] = r.residual;
      double d = -r.g.imag() / kPi;
      if (d < 0.0) {
        if (d >= -1e-10) {
          d = 0.0;
        } else {
          p.ok[i] = false;
          p.failures.push_back("negative density " + std::to_string(d) +
                               " at x=" + std::to_string(p.x[i]));
          d = 0.0;
        }
      }
      p.density[i] = d;
    } catch (const ConvergenceError& e) {
      p.ok[i] = false;
      p.iterations[i] = e.iterations;
      p.residual[i] = e.residual;
      p.density[i] = std::numeric_limits<double>::quiet_NaN();
      p.failures.push_back("no convergence at x=" + std::to_string(p.x[i]) +
                           " (residual " + std::to_string(e.residual) + ")");
      warm = {0.0, 0.0};
    }
  }
  return p;
}

namespace {

AtomScanReport scan_with(const std::function<std::complex<double>(double, double)>& g_at,
                         std::span<const double> grid, double decay_min) {
  AtomScanReport rep;
  rep.eps_schedule = {1e-2, 1e-3, 1e-4};
  rep.grid.assign(grid.begin(), grid.end());
  rep.estimates.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::array<double, 3> est{};
    for (std::size_t j = 0; j < 3; ++j) {
      const double eps = rep.eps_schedule[j];
      est[j] = eps * std::abs(g_at(grid[i], eps).imag());
    }
    bool flag = false;
    for (std::size_t j = 0; j + 1 < 3; ++j)
      if (est[j + 1] * decay_min > est[j]) flag = true;
    rep.estimates.push_back(est);
    if (flag) rep.flagged.push_back(i);
  }
  return rep;
}

}  // namespace

AtomScanReport atom_scan(const DensityProfile& profile, const Measure& mu,
                         double t, double decay_min) {
  CauchyEvaluator gmu(mu);
  SubordinationOptions opts;
  return scan_with(
      [&](double x, double eps) {
        return subordinate_semicircle_full(gmu, t, {x, eps}, opts).g;
      },
      profile.x, decay_min);
}

AtomScanReport atom_scan_measure(const Measure& mu, std::span<const double> grid,
                                 double decay_min) {
  CauchyEvaluator gmu(mu);
  return scan_with([&](double x, double eps) { return gmu({x, eps}); }, grid,
                   decay_min);
}

}  // namespace freeconv
