#include <doctest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "freeconv/nc.hpp"
#include "freeconv/stieltjes.hpp"
#include "oracles.hpp"

using namespace freeconv;
using namespace std::complex_literals;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return xs;
}

// Quadrature oracle for the semicircle transform, via the smooth
// substitution x = 2 sqrt(t) sin(u).
std::complex<double> semicircle_cauchy_quadrature(double t, std::complex<double> z) {
  const double edge = 2.0 * std::sqrt(t);
  return oracles::simpson_complex(
      [&](double u) {
        const double x = edge * std::sin(u);
        return (2.0 / kPi) * std::cos(u) * std::cos(u) / (z - x);
      },
      -kPi / 2.0, kPi / 2.0, 8000);
}

}  // namespace

TEST_SUITE("stieltjes") {

TEST_CASE("cauchy transform: closed forms and the quadrature oracle") {
  CauchyEvaluator g0(Measure::point_mass(0.0));
  for (auto z : {0.0 + 1.0i, 2.0 + 0.3i, -1.5 + 0.01i})
    CHECK(std::abs(g0(z) - 1.0 / z) < 1e-14);

  // semicircle at z = 2i: oracle pins i(1 - sqrt 2)
  CauchyEvaluator gs(Measure::semicircle(1.0));
  const auto want = (1.0 - std::sqrt(2.0)) * 1.0i;
  CHECK(std::abs(gs(2.0i) - want) < 1e-12);
  CHECK(std::abs(semicircle_cauchy_quadrature(1.0, 2.0i) - want) < 1e-10);
  for (auto z : {0.3 + 0.7i, -1.1 + 0.2i, 2.5 + 0.05i})
    CHECK(std::abs(gs(z) - semicircle_cauchy_quadrature(1.0, z)) < 1e-9);

  // two atoms at +-1, z = i: -i/2 by direct algebra
  CauchyEvaluator ga(Measure::atomic({-1.0, 1.0}, {0.5, 0.5}));
  CHECK(std::abs(ga(1.0i) - (-0.5i)) < 1e-14);

  // grid density agrees with the quadrature oracle
  CauchyEvaluator gu(Measure::uniform(1.0, 2.0));
  for (auto z : {0.5 + 0.5i, 1.5 + 0.2i}) {
    const auto oracle = oracles::simpson_complex(
        [&](double x) { return 1.0 / (z - x); }, 1.0, 2.0, 20000);
    CHECK(std::abs(gu(z) - oracle) < 1e-6);
  }

  // empirical spectra use the power-sum kernel path
  CauchyEvaluator ge(Measure::empirical({-1.0, 0.0, 2.0}));
  const auto ze = 0.4 + 0.9i;
  CHECK(std::abs(ge(ze) - (1.0 / (ze + 1.0) + 1.0 / ze + 1.0 / (ze - 2.0)) / 3.0) <
        1e-14);
}

TEST_CASE("cauchy transform invariants: half-plane mapping and 1/z decay") {
  std::vector<Measure> mus;
  mus.push_back(Measure::semicircle(0.5));
  mus.push_back(Measure::atomic({-2.0, 0.5}, {0.3, 0.7}));
  mus.push_back(Measure::uniform(1.0, 2.0));
  mus.push_back(Measure::empirical({0.0, 0.1, 0.4, 1.7}));
  for (const auto& mu : mus) {
    CauchyEvaluator g(mu);
    for (auto z : {0.1 + 0.05i, -2.0 + 1.0i, 3.0 + 2.0i})
      CHECK(g(z).imag() < 0.0);
    const auto far = 1e6i;
    CHECK(std::abs(g(far) * far - 1.0) < 1e-5);
    CHECK_THROWS_AS(g(1.0 - 1.0i), std::domain_error);
    CHECK_THROWS_AS(g(1.0 + 0.0i), std::domain_error);
  }
}

TEST_CASE("subordination: delta_0 reproduces the semicircle transform") {
  Measure d0 = Measure::point_mass(0.0);
  for (auto z : {0.0 + 0.5i, 1.3 + 0.01i, -1.9 + 0.001i, 2.4 + 0.1i}) {
    const auto got = subordinate_semicircle(d0, 1.0, z);
    CHECK(std::abs(got - semicircle_cauchy(1.0, z)) < 1e-10);
    CHECK(got.imag() < 0.0);
  }
}

TEST_CASE("subordination: translation equivariance for a point mass") {
  const double c = 0.8;
  Measure dc = Measure::point_mass(c);
  for (auto z : {0.4 + 0.3i, -0.5 + 0.05i, 1.9 + 0.02i})
    CHECK(std::abs(subordinate_semicircle(dc, 1.0, z) -
                   semicircle_cauchy(1.0, z - c)) < 1e-10);
}

TEST_CASE("subordination: semicircle semigroup via cumulant addition") {
  Measure sc1 = Measure::semicircle(1.0);
  for (auto z : {0.0 + 0.2i, 1.0 + 0.05i, -2.5 + 0.5i, 2.8 + 0.01i})
    CHECK(std::abs(subordinate_semicircle(sc1, 1.0, z) -
                   semicircle_cauchy(2.0, z)) < 1e-10);
}

TEST_CASE("subordination reports residuals and convergence failures") {
  CauchyEvaluator g(Measure::atomic({-1.0, 1.0}, {0.5, 0.5}));
  auto r = subordinate_semicircle_full(g, 1.0, {0.3, 1e-4});
  CHECK(r.residual <= 1e-12);
  CHECK(r.iterations >= 1);

  SubordinationOptions tight;
  tight.maxit = 2;
  bool threw = false;
  try {
    subordinate_semicircle_full(g, 1.0, {0.3, 1e-4}, tight);
  } catch (const ConvergenceError& e) {
    threw = true;
    CHECK(e.iterations == 2);
    CHECK(e.residual > 0.0);
    CHECK(std::isfinite(e.last.real()));
  }
  CHECK(threw);

  CHECK_THROWS_AS(subordinate_semicircle(Measure::point_mass(0.0), -1.0, {0.0, 0.1}),
                  ValidationError);
  CHECK_THROWS_AS(subordinate_semicircle(Measure::point_mass(0.0), 1.0, {0.0, -0.1}),
                  std::domain_error);
}

TEST_CASE("density recovery: semicircle values, leakage, and normalization") {
  Measure d0 = Measure::point_mass(0.0);
  auto p0 = density_of_plus_semicircle(d0, 1.0, std::vector<double>{0.0, 3.0}, 1e-6);
  CHECK(p0.all_ok());
  CHECK(std::abs(p0.density[0] - 1.0 / kPi) < 1e-4);
  CHECK(p0.density[1] < 1e-5);  // outside the support, eps-order leakage only

  auto grid = linspace(-1.5, 4.5, 601);
  auto prof = density_of_plus_semicircle(Measure::uniform(1.0, 2.0), 1.0, grid, 1e-3);
  CHECK(prof.all_ok());
  CHECK(std::abs(prof.mass() - 1.0) <= 0.01);

  CHECK_THROWS_AS(
      density_of_plus_semicircle(d0, 1.0, std::vector<double>{0.0}, 1e-7),
      ValidationError);
  CHECK_THROWS_AS(
      density_of_plus_semicircle(d0, 1.0, std::vector<double>{0.0}, 0.5),
      ValidationError);
}

TEST_CASE("density moment consistency with the exact convolution") {
  Measure mu = Measure::atomic({-1.0, 1.0}, {0.5, 0.5});
  auto grid = linspace(-3.6, 3.6, 721);
  auto prof = density_of_plus_semicircle(mu, 1.0, grid, 1e-4);
  REQUIRE(prof.all_ok());

  auto exact = add_conv_moments(
      atomic_moments(std::vector<std::pair<Rat, Rat>>{{Rat(-1), Rat(1, 2)},
                                                      {Rat(1), Rat(1, 2)}}, 4),
      semicircle_moments(Rat(1), 4), 4);
  auto ed = exact.as_doubles();
  for (int k = 1; k <= 4; ++k) {
    double mk = 0.0;
    for (std::size_t i = 0; i + 1 < prof.x.size(); ++i) {
      const double f0 = std::pow(prof.x[i], k) * prof.density[i];
      const double f1 = std::pow(prof.x[i + 1], k) * prof.density[i + 1];
      mk += 0.5 * (f0 + f1) * (prof.x[i + 1] - prof.x[i]);
    }
    const double scale =
        std::max(std::abs(ed[static_cast<std::size_t>(k) - 1]),
                 std::pow(std::sqrt(ed[1]), k));
    CHECK(std::abs(mk - ed[static_cast<std::size_t>(k) - 1]) / scale <= 0.02);
  }
}

TEST_CASE("atom scan: convolved measures are clean, raw atoms are flagged") {
  auto grid = linspace(-2.5, 2.5, 101);
  auto prof = density_of_plus_semicircle(Measure::point_mass(0.0), 1.0, grid, 1e-4);
  CHECK(atom_scan(prof, Measure::point_mass(0.0), 1.0).clean());

  Measure two = Measure::atomic({-1.0, 1.0}, {0.5, 0.5});
  auto grid2 = linspace(-3.2, 3.2, 129);
  auto prof2 = density_of_plus_semicircle(two, 1.0, grid2, 1e-4);
  CHECK(atom_scan(prof2, two, 1.0).clean());

  // diagnostic self-test: the raw transform of a point mass must flag it
  auto raw = atom_scan_measure(Measure::point_mass(0.0), std::vector<double>{0.0, 1.0});
  CHECK(!raw.clean());
  REQUIRE(!raw.flagged.empty());
  CHECK(raw.grid[raw.flagged[0]] == 0.0);
  // estimate at the atom approaches the atom mass 1
  CHECK(raw.estimates[raw.flagged[0]][2] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("density profile CSV export") {
  auto grid = linspace(-2.2, 2.2, 45);
  auto prof = density_of_plus_semicircle(Measure::point_mass(0.0), 1.0, grid, 1e-4);
  const auto path = std::filesystem::temp_directory_path() / "fc_density_test.csv";
  prof.write_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,density,eps,iterations,residual");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 45);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
