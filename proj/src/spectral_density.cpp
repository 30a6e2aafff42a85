#include "freeconv/spectral_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace freeconv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPi2 = 4.0 * kPi * kPi;

double q_eval(std::span<const double> coef, double x) {
  double s = coef[0];
  for (std::size_t k = 1; k < coef.size(); ++k)
    s += 2.0 * coef[k] * std::cos(static_cast<double>(k) * x);
  return s;
}

double table_interp(std::span<const double> r, double x) {
  // Midpoint table over [-pi, pi]: node i sits at -pi + (i + 1/2) h.
  const auto k = static_cast<double>(r.size());
  const double h = 2.0 * kPi / k;
  double u = (x + kPi) / h - 0.5;
  if (u <= 0.0) return r.front();
  if (u >= k - 1.0) return r.back();
  const auto i = static_cast<std::size_t>(u);
  const double s = u - static_cast<double>(i);
  return r[i] * (1.0 - s) + r[i + 1] * s;
}

double taper_factor(Taper taper, int j, int m) {
  switch (taper) {
    case Taper::kRaw:
      return 1.0;
    case Taper::kFejer:
      return 1.0 - static_cast<double>(j) / static_cast<double>(m + 1);
    case Taper::kJackson:
    default: {
      const double mp = m + 1;
      const double c = kPi * static_cast<double>(j) / mp;
      return ((mp - j) * std::cos(c) +
              std::sin(c) / std::tan(kPi / mp)) /
             mp;
    }
  }
}

std::size_t tp_index(const TrigPoly& t, int j, int k) {
  const int w = 2 * t.degree + 1;
  return static_cast<std::size_t>((j + t.degree) * w + (k + t.degree));
}

double tp_value(const TrigPoly& t, double x, double y) {
  const int n = t.degree;
  double s = t.coef[tp_index(t, 0, 0)];
  for (int j = -n; j <= n; ++j)
    for (int k = -n; k <= n; ++k) {
      if (j < 0 || (j == 0 && k <= 0)) continue;  // half-space; pair with (-j,-k)
      s += 2.0 * t.coef[tp_index(t, j, k)] *
           std::cos(static_cast<double>(j) * x + static_cast<double>(k) * y);
    }
  return s;
}

SeparablePoly compile_separable(const SeparableR& sep, int total_degree,
                                Taper taper) {
  const int m = std::max(1, total_degree / 2);
  const auto k_table = sep.r.size();
  const double h = 2.0 * kPi / static_cast<double>(k_table);

  std::vector<double> root(k_table);
  for (std::size_t i = 0; i < k_table; ++i) root[i] = std::sqrt(sep.r[i]);

  // Fourier coefficients of sqrt(r) by midpoint quadrature (real and even).
  std::vector<double> p(static_cast<std::size_t>(m) + 1, 0.0);
  for (int j = 0; j <= m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < k_table; ++i) {
      const double x = -kPi + (static_cast<double>(i) + 0.5) * h;
      s += root[i] * std::cos(j * x);
    }
    p[static_cast<std::size_t>(j)] =
        taper_factor(taper, j, m) * s * h / (2.0 * kPi);
  }

  // q = p^2 via coefficient convolution over signed indices.
  SeparablePoly out;
  out.coef.assign(static_cast<std::size_t>(2 * m) + 1, 0.0);
  for (int j = -m; j <= m; ++j)
    for (int l = -m; l <= m; ++l) {
      const int k = j + l;
      if (k < 0) continue;  // q_k = q_{-k}
      out.coef[static_cast<std::size_t>(k)] +=
          p[static_cast<std::size_t>(std::abs(j))] *
          p[static_cast<std::size_t>(std::abs(l))];
    }

  constexpr int kScan = 8192;
  double min_q = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    const double x = -kPi + (static_cast<double>(i) + 0.5) * (2.0 * kPi / kScan);
    min_q = std::min(min_q, q_eval(out.coef, x));
  }
  // The taper guarantees q >= (ess inf r) up to quadrature error; restore a
  // declared bound exactly with a constant lift.
  if (sep.lower_bound > 0.0 && min_q < sep.lower_bound) {
    out.lift = sep.lower_bound - min_q;
    out.coef[0] += out.lift;
    min_q = sep.lower_bound;
  }
  out.min_value = min_q;
  return out;
}

}  // namespace

SpectralDensity2D SpectralDensity2D::trig_poly(int degree,
                                               std::vector<double> coef) {
  if (degree < 0) throw ValidationError("trig_poly: degree must be >= 0");
  const int w = 2 * degree + 1;
  if (coef.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(w))
    throw ValidationError("trig_poly: coefficient table must be (2n+1)^2");
  TrigPoly t{degree, std::move(coef)};

  double scale = 0.0;
  for (double c : t.coef) scale = std::max(scale, std::abs(c));
  for (int j = -degree; j <= degree; ++j)
    for (int k = -degree; k <= degree; ++k) {
      const double a = t.coef[tp_index(t, j, k)];
      const double b = t.coef[tp_index(t, -j, -k)];
      if (std::abs(a - b) > 1e-12 * std::max(1.0, scale))
        throw ValidationError("trig_poly: coefficients must satisfy a(j,k) = a(-j,-k)");
      const double avg = 0.5 * (a + b);
      t.coef[tp_index(t, j, k)] = avg;
      t.coef[tp_index(t, -j, -k)] = avg;
    }

  constexpr int kGrid = 512;
  for (int i = 0; i < kGrid; ++i)
    for (int j = 0; j < kGrid; ++j) {
      const double x = -kPi + 2.0 * kPi * i / kGrid;
      const double y = -kPi + 2.0 * kPi * j / kGrid;
      if (tp_value(t, x, y) < -1e-9 * std::max(1.0, scale))
        throw ValidationError("trig_poly: density is negative on the grid");
    }
  return SpectralDensity2D(Rep{std::move(t)});
}

SpectralDensity2D SpectralDensity2D::constant(double c) {
  if (!(c >= 0.0)) throw ValidationError("constant density must be >= 0");
  return trig_poly(0, {c});
}

SpectralDensity2D SpectralDensity2D::separable_from_measure(const Measure& mu,
                                                            double delta,
                                                            int table_size) {
  if (delta < 0.0) throw ValidationError("separable_from_measure: delta >= 0");
  if (table_size < 16) throw ValidationError("separable_from_measure: table too small");
  SeparableR sep;
  sep.r.resize(static_cast<std::size_t>(table_size));
  const double h = 2.0 * kPi / table_size;
  for (int i = 0; i < table_size; ++i) {
    const double x = -kPi + (static_cast<double>(i) + 0.5) * h;
    sep.r[static_cast<std::size_t>(i)] = quantile_r(mu, x);
  }
  sep.lower_bound = delta > 0.0 ? delta / kQuantileScale : 0.0;
  return SpectralDensity2D(Rep{std::move(sep)});
}

SpectralDensity2D SpectralDensity2D::separable_tabulated(std::vector<double> r,
                                                         double lower_bound) {
  if (r.size() < 16) throw ValidationError("separable_tabulated: table too small");
  for (double v : r)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("separable_tabulated: r must be nonnegative");
  // r must be even; the midpoint table mirrors around the center.
  for (std::size_t i = 0; i < r.size() / 2; ++i) {
    const std::size_t j = r.size() - 1 - i;
    if (std::abs(r[i] - r[j]) > 1e-12 * std::max(1.0, std::abs(r[i])))
      throw ValidationError("separable_tabulated: r must be even");
    const double avg = 0.5 * (r[i] + r[j]);
    r[i] = avg;
    r[j] = avg;
  }
  return SpectralDensity2D(Rep{SeparableR{std::move(r), lower_bound}});
}

SpectralDensity2D SpectralDensity2D::shifted(SpectralDensity2D base,
                                             double alpha) {
  if (!(alpha >= 0.0)) throw ValidationError("shifted: alpha must be >= 0");
  return SpectralDensity2D(Rep{Shifted{
      std::make_shared<const SpectralDensity2D>(std::move(base)), alpha}});
}

SpectralDensity2D SpectralDensity2D::minus_constant(SpectralDensity2D base,
                                                    double alpha) {
  if (!(alpha >= 0.0)) throw ValidationError("minus_constant: alpha must be >= 0");
  const double mn = base.min_on_grid(512);
  if (alpha > mn + 1e-12)
    throw ValidationError("minus_constant: alpha exceeds the density minimum");
  return SpectralDensity2D(Rep{Shifted{
      std::make_shared<const SpectralDensity2D>(std::move(base)), -alpha}});
}

double SpectralDensity2D::value(double x, double y) const {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, TrigPoly>) {
          return tp_value(rep, x, y);
        } else if constexpr (std::is_same_v<T, SeparableR>) {
          return table_interp(rep.r, x) * table_interp(rep.r, y);
        } else if constexpr (std::is_same_v<T, SeparablePoly>) {
          return q_eval(rep.coef, x) * q_eval(rep.coef, y);
        } else {
          return rep.base->value(x, y) + rep.alpha;
        }
      },
      rep_);
}

double SpectralDensity2D::covariance(int u, int v) const {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, TrigPoly>) {
          if (std::abs(u) > rep.degree || std::abs(v) > rep.degree) return 0.0;
          return kFourPi2 * rep.coef[tp_index(rep, -u, -v)];
        } else if constexpr (std::is_same_v<T, SeparableR>) {
          const double h = 2.0 * kPi / static_cast<double>(rep.r.size());
          auto cov1 = [&](int w) {
            double s = 0.0;
            for (std::size_t i = 0; i < rep.r.size(); ++i) {
              const double x = -kPi + (static_cast<double>(i) + 0.5) * h;
              s += rep.r[i] * std::cos(w * x);
            }
            return s * h;
          };
          return cov1(u) * cov1(v);
        } else if constexpr (std::is_same_v<T, SeparablePoly>) {
          const auto n = static_cast<int>(rep.coef.size()) - 1;
          if (std::abs(u) > n || std::abs(v) > n) return 0.0;
          return kFourPi2 * rep.coef[static_cast<std::size_t>(std::abs(u))] *
                 rep.coef[static_cast<std::size_t>(std::abs(v))];
        } else {
          double c = rep.base->covariance(u, v);
          if (u == 0 && v == 0) c += kFourPi2 * rep.alpha;
          return c;
        }
      },
      rep_);
}

SpectralDensity2D SpectralDensity2D::symmetrize() const {
  return std::visit(
      [&](const auto& rep) -> SpectralDensity2D {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, TrigPoly>) {
          TrigPoly out = rep;
          const int n = rep.degree;
          for (int j = -n; j <= n; ++j)
            for (int k = -n; k <= n; ++k)
              out.coef[tp_index(out, j, k)] =
                  0.5 * (rep.coef[tp_index(rep, j, k)] +
                         rep.coef[tp_index(rep, k, j)]);
          return SpectralDensity2D(Rep{std::move(out)});
        } else if constexpr (std::is_same_v<T, Shifted>) {
          return SpectralDensity2D(Rep{Shifted{
              std::make_shared<const SpectralDensity2D>(rep.base->symmetrize()),
              rep.alpha}});
        } else {
          return *this;  // separable forms are already symmetric in (x,y)
        }
      },
      rep_);
}

double SpectralDensity2D::ess_inf_sym() const {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, SeparableR>) {
          if (rep.lower_bound > 0.0) return 2.0 * rep.lower_bound * rep.lower_bound;
          const double mn = *std::min_element(rep.r.begin(), rep.r.end());
          return 2.0 * mn * mn;
        } else if constexpr (std::is_same_v<T, SeparablePoly>) {
          return 2.0 * rep.min_value * rep.min_value;
        } else if constexpr (std::is_same_v<T, Shifted>) {
          return rep.base->ess_inf_sym() + 2.0 * rep.alpha;
        } else {
          constexpr int kGrid = 1024;
          double mn = std::numeric_limits<double>::infinity();
          for (int i = 0; i < kGrid; ++i)
            for (int j = 0; j < kGrid; ++j) {
              const double x = -kPi + 2.0 * kPi * i / kGrid;
              const double y = -kPi + 2.0 * kPi * j / kGrid;
              mn = std::min(mn, tp_value(rep, x, y) + tp_value(rep, y, x));
            }
          return mn;
        }
      },
      rep_);
}

std::optional<int> SpectralDensity2D::bandlimit() const {
  return std::visit(
      [&](const auto& rep) -> std::optional<int> {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, TrigPoly>) return rep.degree;
        else if constexpr (std::is_same_v<T, SeparablePoly>)
          return static_cast<int>(rep.coef.size()) - 1;
        else if constexpr (std::is_same_v<T, Shifted>) return rep.base->bandlimit();
        else return std::nullopt;
      },
      rep_);
}

SpectralDensity2D SpectralDensity2D::bandlimited(int total_degree,
                                                 Taper taper) const {
  return std::visit(
      [&](const auto& rep) -> SpectralDensity2D {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, SeparableR>) {
          return SpectralDensity2D(Rep{compile_separable(rep, total_degree, taper)});
        } else if constexpr (std::is_same_v<T, Shifted>) {
          return SpectralDensity2D(Rep{Shifted{
              std::make_shared<const SpectralDensity2D>(
                  rep.base->bandlimited(total_degree, taper)),
              rep.alpha}});
        } else {
          return *this;
        }
      },
      rep_);
}

double SpectralDensity2D::min_on_grid(int grid) const {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, SeparableR>) {
          const double mn = *std::min_element(rep.r.begin(), rep.r.end());
          return mn * mn;
        } else if constexpr (std::is_same_v<T, SeparablePoly>) {
          return rep.min_value * rep.min_value;
        } else if constexpr (std::is_same_v<T, Shifted>) {
          return rep.base->min_on_grid(grid) + rep.alpha;
        } else {
          double mn = std::numeric_limits<double>::infinity();
          for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
              const double x = -kPi + 2.0 * kPi * i / grid;
              const double y = -kPi + 2.0 * kPi * j / grid;
              mn = std::min(mn, tp_value(rep, x, y));
            }
          return mn;
        }
      },
      rep_);
}

void SpectralDensity2D::fill_spectrum(int period,
                                      std::vector<double>& out) const {
  const auto m = static_cast<std::size_t>(period);
  out.resize(m * m);
  std::vector<double> xs(m);
  for (int s = 0; s < period; ++s)
    xs[static_cast<std::size_t>(s)] =
        (s <= period / 2) ? 2.0 * kPi * s / period
                          : 2.0 * kPi * (s - period) / period;

  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, SeparablePoly>) {
          std::vector<double> qv(m);
          for (std::size_t s = 0; s < m; ++s) qv[s] = q_eval(rep.coef, xs[s]);
          for (std::size_t s = 0; s < m; ++s)
            for (std::size_t t = 0; t < m; ++t)
              out[s * m + t] = kFourPi2 * qv[s] * qv[t];
        } else if constexpr (std::is_same_v<T, TrigPoly>) {
          for (std::size_t s = 0; s < m; ++s)
            for (std::size_t t = 0; t < m; ++t)
              out[s * m + t] = kFourPi2 * tp_value(rep, xs[s], xs[t]);
        } else if constexpr (std::is_same_v<T, Shifted>) {
          rep.base->fill_spectrum(period, out);
          const double add = kFourPi2 * rep.alpha;
          for (double& v : out) v += add;
        } else {
          throw ValidationError(
              "fill_spectrum: tabulated separable density must be compiled "
              "with bandlimited() first");
        }
      },
      rep_);
}

nlohmann::json SpectralDensity2D::to_json() const {
  return std::visit(
      [&](const auto& rep) -> nlohmann::json {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, TrigPoly>) {
          return {{"kind", "trig_poly"}, {"degree", rep.degree}, {"coef", rep.coef}};
        } else if constexpr (std::is_same_v<T, SeparableR>) {
          return {{"kind", "separable"},
                  {"r", rep.r},
                  {"lower_bound", rep.lower_bound}};
        } else if constexpr (std::is_same_v<T, SeparablePoly>) {
          return {{"kind", "separable_poly"},
                  {"coef", rep.coef},
                  {"min_value", rep.min_value},
                  {"lift", rep.lift}};
        } else {
          return {{"kind", "shifted"},
                  {"alpha", rep.alpha},
                  {"base", rep.base->to_json()}};
        }
      },
      rep_);
}

SpectralDensity2D SpectralDensity2D::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "trig_poly")
    return trig_poly(j.at("degree").get<int>(),
                     j.at("coef").get<std::vector<double>>());
  if (kind == "separable")
    return separable_tabulated(j.at("r").get<std::vector<double>>(),
                               j.value("lower_bound", 0.0));
  if (kind == "separable_poly") {
    SeparablePoly p;
    p.coef = j.at("coef").get<std::vector<double>>();
    p.min_value = j.value("min_value", 0.0);
    p.lift = j.value("lift", 0.0);
    return SpectralDensity2D(Rep{std::move(p)});
  }
  if (kind == "shifted") {
    auto base = from_json(j.at("base"));
    const double alpha = j.at("alpha").get<double>();
    return SpectralDensity2D(Rep{Shifted{
        std::make_shared<const SpectralDensity2D>(std::move(base)), alpha}});
  }
  throw ValidationError("spectral density: unknown kind '" + kind + "'");
}

}  // namespace freeconv
