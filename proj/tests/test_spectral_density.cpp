#include <doctest.h>

#include <cmath>
#include <numbers>

#include "freeconv/spectral_density.hpp"
#include "oracles.hpp"

using namespace freeconv;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralDensity2D cos_xy_density(double c0, double c1) {
  // c0 + c1 cos(x + y): even, symmetric, nonnegative for c0 >= c1.
  const int n = 1, w = 3;
  std::vector<double> coef(static_cast<std::size_t>(w * w), 0.0);
  coef[static_cast<std::size_t>((1 + n) * w + (1 + n))] = 0.5 * c1;   // (1,1)
  coef[static_cast<std::size_t>((-1 + n) * w + (-1 + n))] = 0.5 * c1; // (-1,-1)
  coef[static_cast<std::size_t>((0 + n) * w + (0 + n))] = c0;
  return SpectralDensity2D::trig_poly(n, std::move(coef));
}

SpectralDensity2D asym_density() {
  // c0 + c1 cos(x + 2y): even but not symmetric under (x,y) -> (y,x).
  const int n = 2, w = 5;
  std::vector<double> coef(static_cast<std::size_t>(w * w), 0.0);
  coef[static_cast<std::size_t>((0 + n) * w + (0 + n))] = 1.0 / (4.0 * kPi * kPi);
  coef[static_cast<std::size_t>((1 + n) * w + (2 + n))] = 0.5 / (8.0 * kPi * kPi);
  coef[static_cast<std::size_t>((-1 + n) * w + (-2 + n))] = 0.5 / (8.0 * kPi * kPi);
  return SpectralDensity2D::trig_poly(n, std::move(coef));
}

// 2-d Simpson quadrature oracle for covariance integrals.
double covariance_quadrature(const SpectralDensity2D& f, int u, int v) {
  return oracles::simpson(
      [&](double x) {
        return oracles::simpson(
            [&](double y) {
              return f.value(x, y) * std::cos(u * x + v * y);
            },
            -kPi, kPi, 256);
      },
      -kPi, kPi, 256);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("covariance: constant density (orthogonality of exponentials)") {
  auto f = SpectralDensity2D::constant(1.0 / (8.0 * kPi * kPi));
  CHECK(f.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.covariance(1, 0) == 0.0);
  CHECK(f.covariance(0, 3) == 0.0);
  CHECK(f.covariance(-2, 5) == 0.0);
}

TEST_CASE("covariance: trig polynomial vs the symbolic and quadrature oracles") {
  const double c = 0.1;
  auto f = cos_xy_density(c, c);
  // symbolic: 4 pi^2 a_{-u,-v}
  CHECK(f.covariance(1, 1) == doctest::Approx(2.0 * kPi * kPi * c).epsilon(1e-12));
  CHECK(f.covariance(-1, -1) == doctest::Approx(2.0 * kPi * kPi * c).epsilon(1e-12));
  CHECK(f.covariance(0, 0) == doctest::Approx(4.0 * kPi * kPi * c).epsilon(1e-12));
  CHECK(f.covariance(1, 0) == 0.0);
  CHECK(f.covariance(2, 2) == 0.0);
  // quadrature cross-check
  CHECK(covariance_quadrature(f, 1, 1) ==
        doctest::Approx(2.0 * kPi * kPi * c).epsilon(1e-8));
  CHECK(covariance_quadrature(f, 1, 0) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("covariance: shifted density adds 4 pi^2 alpha at lag zero only") {
  auto base = cos_xy_density(0.1, 0.05);
  const double alpha = 0.02;
  auto shifted = SpectralDensity2D::shifted(base, alpha);
  CHECK(shifted.covariance(0, 0) ==
        doctest::Approx(base.covariance(0, 0) + 4.0 * kPi * kPi * alpha));
  CHECK(shifted.covariance(1, 1) == doctest::Approx(base.covariance(1, 1)));
  CHECK(shifted.value(0.3, -0.7) ==
        doctest::Approx(base.value(0.3, -0.7) + alpha));
  CHECK_THROWS_AS(SpectralDensity2D::shifted(base, -0.1), ValidationError);
}

TEST_CASE("separable density from a measure: values and covariance product") {
  Measure mu = Measure::uniform(1.0, 2.0);
  auto f = SpectralDensity2D::separable_from_measure(mu, 1.0);
  // f(x,y) = r(x) r(y) with r = (1 + |x|/pi) / (2^{3/2} pi)
  auto r = [](double x) { return (1.0 + std::abs(x) / kPi) / kQuantileScale; };
  for (auto [x, y] : {std::pair{0.5, 1.0}, {2.0, -2.0}, {1.3, 0.2}})
    CHECK(f.value(x, y) == doctest::Approx(r(x) * r(y)).epsilon(1e-3));
  // covariance factorizes into 1-d quadratures
  const double c0 = f.covariance(0, 0);
  const double r_int = oracles::simpson(r, -kPi, kPi, 4096);
  CHECK(c0 == doctest::Approx(r_int * r_int).epsilon(1e-6));
  const double c12 = f.covariance(1, 2);
  auto cos_int = [&](int w) {
    return oracles::simpson([&](double x) { return r(x) * std::cos(w * x); },
                            -kPi, kPi, 4096);
  };
  CHECK(c12 == doctest::Approx(cos_int(1) * cos_int(2)).epsilon(1e-6));
}

TEST_CASE("symmetrize: separable fixed point, coefficient rule, idempotence") {
  auto sep = SpectralDensity2D::separable_from_measure(Measure::uniform(1.0, 2.0), 1.0);
  auto sep_sym = sep.symmetrize();
  CHECK(sep_sym.value(0.4, -1.1) == sep.value(0.4, -1.1));

  auto f = asym_density();
  auto g = f.symmetrize();
  for (auto [x, y] : {std::pair{0.3, 0.9}, {-1.2, 0.4}, {2.0, -2.5}}) {
    CHECK(g.value(x, y) ==
          doctest::Approx(0.5 * (f.value(x, y) + f.value(y, x))).epsilon(1e-12));
    CHECK(g.value(x, y) == doctest::Approx(g.value(y, x)).epsilon(1e-12));
  }
  // idempotent, and lag-(0,0) covariance (the L1 norm) is preserved
  auto g2 = g.symmetrize();
  CHECK(g2.value(0.3, 0.9) == doctest::Approx(g.value(0.3, 0.9)).epsilon(1e-14));
  CHECK(g.covariance(0, 0) == doctest::Approx(f.covariance(0, 0)).epsilon(1e-12));

  auto fc = SpectralDensity2D::constant(0.3);
  CHECK(fc.symmetrize().value(1.0, 2.0) == doctest::Approx(0.3));
}

TEST_CASE("ess_inf_sym: constants, quantile bound, vanishing density") {
  auto fc = SpectralDensity2D::constant(1.0 / (8.0 * kPi * kPi));
  CHECK(fc.ess_inf_sym() == doctest::Approx(2.0 / (8.0 * kPi * kPi)).epsilon(1e-6));

  // separable from mu with mu([1, inf)) = 1: exact bound 2 delta^2/(8 pi^2)
  auto sep = SpectralDensity2D::separable_from_measure(Measure::uniform(1.0, 2.0), 1.0);
  CHECK(sep.ess_inf_sym() ==
        doctest::Approx(1.0 / (4.0 * kPi * kPi)).epsilon(1e-12));
  CHECK(sep.ess_inf_sym() ==
        doctest::Approx(2.0 / (kQuantileScale * kQuantileScale)));

  // s (1 - cos x): vanishes on the line x = 0
  {
    const int n = 1, w = 3;
    const double s = 0.2;
    std::vector<double> coef(9, 0.0);
    coef[static_cast<std::size_t>((0 + n) * w + (0 + n))] = s;
    coef[static_cast<std::size_t>((1 + n) * w + (0 + n))] = -0.5 * s;
    coef[static_cast<std::size_t>((-1 + n) * w + (0 + n))] = -0.5 * s;
    auto f = SpectralDensity2D::trig_poly(1, std::move(coef));
    CHECK(f.ess_inf_sym() <= 1e-6);
    CHECK(f.ess_inf_sym() >= -1e-9);
  }
}

TEST_CASE("trig polynomial validation: symmetry and nonnegativity") {
  // negative region: 0.1 + 0.4 cos(x)
  std::vector<double> bad(9, 0.0);
  bad[4] = 0.1;
  bad[static_cast<std::size_t>((1 + 1) * 3 + (0 + 1))] = 0.2;
  bad[static_cast<std::size_t>((-1 + 1) * 3 + (0 + 1))] = 0.2;
  CHECK_THROWS_AS(SpectralDensity2D::trig_poly(1, std::move(bad)), ValidationError);

  // evenness violation: a(1,0) != a(-1,0)
  std::vector<double> asym(9, 0.0);
  asym[4] = 1.0;
  asym[static_cast<std::size_t>((1 + 1) * 3 + (0 + 1))] = 0.1;
  CHECK_THROWS_AS(SpectralDensity2D::trig_poly(1, std::move(asym)), ValidationError);

  CHECK_THROWS_AS(SpectralDensity2D::constant(-0.5), ValidationError);
  CHECK_THROWS_AS(SpectralDensity2D::trig_poly(1, {1.0}), ValidationError);
}

TEST_CASE("bandlimited compile: taper keeps the declared lower bound") {
  Measure mu = Measure::uniform(1.0, 2.0);
  auto base = SpectralDensity2D::separable_from_measure(mu, 1.0);
  const double alpha = 1.0 / (8.0 * kPi * kPi);

  for (auto taper : {Taper::kFejer, Taper::kJackson}) {
    auto f = base.bandlimited(256, taper);
    const auto* sp = std::get_if<SeparablePoly>(&f.rep());
    REQUIRE(sp != nullptr);
    CHECK(static_cast<int>(sp->coef.size()) - 1 == 256);
    CHECK(sp->min_value * sp->min_value >= alpha - 1e-12);
    // compiled covariance approximates the tabulated one
    CHECK(f.covariance(0, 0) == doctest::Approx(base.covariance(0, 0)).epsilon(2e-3));
    CHECK(f.covariance(1, 1) == doctest::Approx(base.covariance(1, 1)).epsilon(5e-2));
  }

  // constant measure: compile is exact and min f - alpha = 0 up to roundoff
  auto c = SpectralDensity2D::separable_from_measure(Measure::point_mass(1.0), 1.0)
               .bandlimited(64, Taper::kJackson);
  CHECK(c.value(0.3, 0.7) == doctest::Approx(1.0 / (8.0 * kPi * kPi)).epsilon(1e-10));
  CHECK(c.min_on_grid() == doctest::Approx(alpha).epsilon(1e-10));

  // already band-limited inputs pass through unchanged
  auto tp = cos_xy_density(0.1, 0.05);
  CHECK(tp.bandlimited(64, Taper::kJackson).value(0.3, 0.4) ==
        doctest::Approx(tp.value(0.3, 0.4)));
}

TEST_CASE("minus_constant validates against the density minimum") {
  auto f = cos_xy_density(0.1, 0.04);  // min = 0.06
  auto h = SpectralDensity2D::minus_constant(f, 0.05);
  CHECK(h.value(0.2, 0.4) == doctest::Approx(f.value(0.2, 0.4) - 0.05).epsilon(1e-12));
  CHECK(h.covariance(0, 0) ==
        doctest::Approx(f.covariance(0, 0) - 0.05 * 4.0 * kPi * kPi).epsilon(1e-12));
  CHECK(h.covariance(1, 1) == doctest::Approx(f.covariance(1, 1)));
  CHECK_THROWS_AS(SpectralDensity2D::minus_constant(f, 0.07), ValidationError);
}

TEST_CASE("fill_spectrum: values are 4 pi^2 f at FFT frequencies") {
  auto f = SpectralDensity2D::constant(1.0 / (8.0 * kPi * kPi));
  std::vector<double> spec;
  f.fill_spectrum(16, spec);
  REQUIRE(spec.size() == 256);
  for (double v : spec) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

  auto sep = SpectralDensity2D::separable_from_measure(Measure::uniform(1.0, 2.0), 1.0);
  CHECK_THROWS_AS(sep.fill_spectrum(16, spec), ValidationError);
  auto sepc = sep.bandlimited(32, Taper::kJackson);
  sepc.fill_spectrum(128, spec);
  double mn = 1e300;
  for (double v : spec) mn = std::min(mn, v);
  CHECK(mn >= 0.0);  // taper + lift keep the circulant spectrum nonnegative

  // spot-check one frequency against value()
  const double x3 = 2.0 * kPi * 3.0 / 128.0;
  CHECK(spec[3 * 128 + 3] ==
        doctest::Approx(4.0 * kPi * kPi * sepc.value(x3, x3)).epsilon(1e-12));
}

TEST_CASE("serialization round trip for every variant") {
  std::vector<SpectralDensity2D> cases;
  cases.push_back(cos_xy_density(0.1, 0.05));
  cases.push_back(
      SpectralDensity2D::separable_from_measure(Measure::uniform(1.0, 2.0), 1.0));
  cases.push_back(cases[1].bandlimited(64, Taper::kJackson));
  cases.push_back(SpectralDensity2D::shifted(cases[0], 0.03));
  cases.push_back(SpectralDensity2D::minus_constant(cos_xy_density(0.1, 0.04), 0.05));
  for (const auto& f : cases) {
    auto j = f.to_json();
    auto back = SpectralDensity2D::from_json(j);
    CHECK(back.to_json() == j);
    for (auto [x, y] : {std::pair{0.0, 0.0}, {1.1, -0.6}})
      CHECK(back.value(x, y) == doctest::Approx(f.value(x, y)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(SpectralDensity2D::from_json({{"kind", "nope"}}), ValidationError);
}

}  // TEST_SUITE
