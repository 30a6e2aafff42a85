// Acceptance suite: one function per criterion, each printing a single
// PASS/FAIL line and enforcing its runtime budget. Exit code is the number
// of failed criteria. Run all with no arguments or one with --criterion k.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "freeconv/field.hpp"
#include "freeconv/kernels.hpp"
#include "freeconv/matrix_ensembles.hpp"
#include "freeconv/nc.hpp"
#include "freeconv/rng.hpp"
#include "freeconv/scenario.hpp"
#include "freeconv/stieltjes.hpp"

using namespace freeconv;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::filesystem::path acceptance_out(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / "freeconv_acceptance" / tag;
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<Rat> pseudo_random_rationals(int k, std::uint64_t stream) {
  GaussianStream rng(20250810, stream);
  std::vector<Rat> v(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const auto num =
        static_cast<long>(rng.uniform(static_cast<std::uint64_t>(i)) * 19) - 9;
    const auto den =
        static_cast<long>(rng.uniform(static_cast<std::uint64_t>(i), 1) * 8) + 1;
    v[static_cast<std::size_t>(i)] = Rat(num, den);
  }
  return v;
}

// 1. Combinatorial oracle equivalence.
Outcome criterion1() {
  Outcome out;
  const long expected[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430};
  for (int n = 1; n <= 8; ++n)
    out.require(enumerate_nc(n).size() == static_cast<std::size_t>(expected[n]),
                "catalan count n=" + std::to_string(n));

  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    auto kappa = pseudo_random_rationals(10, trial);
    auto m = moments_from_cumulants(kappa);
    out.require(cumulants_from_moments(m) == kappa,
                "moment<->cumulant round trip trial " + std::to_string(trial));
  }

  for (int n = 1; n <= 8; ++n)
    for (const auto& p : enumerate_nc(n))
      out.require(p.blocks.size() + kreweras(p).blocks.size() ==
                      static_cast<std::size_t>(n) + 1,
                  "kreweras block identity n=" + std::to_string(n));
  return out;
}

Outcome scenario_pass(ScenarioId id, const std::string& tag) {
  ScenarioConfig cfg = ScenarioConfig::defaults(id);
  cfg.out_dir = acceptance_out(tag);
  auto res = run_scenario(cfg);
  Outcome out;
  out.require(res.exit_code == 0,
              "scenario exit code " + std::to_string(res.exit_code));
  if (res.manifest.contains("criteria"))
    for (const auto& c : res.manifest.at("criteria"))
      if (!c.at("pass").get<bool>())
        out.detail += c.at("name").get<std::string>() + " ";
  return out;
}

// 2. Wigner sanity at N=1024, 5 replicates.
Outcome criterion2() { return scenario_pass(ScenarioId::kWignerSanity, "wigner"); }

// 3. Constant density f = 1/(8 pi^2): ESD of Gbar vs the standard semicircle.
Outcome criterion3() {
  Outcome out;
  auto f = SpectralDensity2D::constant(1.0 / (8.0 * kPi * kPi));
  auto g = sample_field(f, 1024, 20250810, 0);
  auto spec = eigenvalues(build_gbar(g), "gbar_const");
  const double ks = ks_distance(spec.to_measure(), Measure::semicircle(1.0));
  out.require(ks <= 0.06, "KS=" + std::to_string(ks) + " > 0.06");
  out.detail = "KS=" + std::to_string(ks);
  return out;
}

// 4. Free multiplicative convolution via matrices (mu = Uniform[1,2]).
Outcome criterion4() { return scenario_pass(ScenarioId::kFact3Separable, "fact3"); }

// 5. The additive-shift identity, including the kappa_2 gap at 7%.
Outcome criterion5() { return scenario_pass(ScenarioId::kLemma1, "lemma1"); }

// 6. Subordination density of eta-hat boxplus semicircle(delta^2): unit mass,
//    finite everywhere, no atom flags, residuals at tolerance.
Outcome criterion6() {
  ScenarioConfig cfg = ScenarioConfig::defaults(ScenarioId::kPropositionSumMult);
  cfg.out_dir = acceptance_out("proposition");
  auto res = run_scenario(cfg);
  Outcome out;
  out.require(res.manifest.at("status") == "complete", "scenario did not complete");
  if (!out.pass) return out;
  const auto& results = res.manifest.at("results");
  const double mass = results.at("density").at("mass").get<double>();
  const int flags = results.at("density").at("atom_flags").get<int>();
  const int failed = results.at("density").at("failed_points").get<int>();
  const double resid = results.at("density").at("max_residual").get<double>();
  out.require(std::abs(mass - 1.0) <= 0.02, "mass=" + std::to_string(mass));
  out.require(failed == 0, std::to_string(failed) + " non-finite grid points");
  out.require(flags == 0, std::to_string(flags) + " atom flags");
  out.require(resid <= 1e-12, "max residual " + std::to_string(resid));
  out.detail = "mass=" + std::to_string(mass) + " flags=" + std::to_string(flags);
  return out;
}

// 7. Symmetrization invariance at N=1024.
Outcome criterion7() { return scenario_pass(ScenarioId::kFact5Symmetrize, "fact5"); }

// 8. Subordination solver against the closed-form semicircle density.
Outcome criterion8() {
  Outcome out;
  Measure d0 = Measure::point_mass(0.0);
  const int points = 721;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] = -1.8 + 3.6 * i / (points - 1);
  auto prof = density_of_plus_semicircle(d0, 1.0, grid, 1e-4);
  out.require(prof.all_ok(), "solver failures on the grid");
  double sup = 0.0, max_resid = 0.0;
  for (std::size_t i = 0; i < prof.x.size(); ++i) {
    sup = std::max(sup,
                   std::abs(prof.density[i] - semicircle_density(1.0, prof.x[i])));
    max_resid = std::max(max_resid, prof.residual[i]);
  }
  out.require(sup <= 1e-3, "sup density error " + std::to_string(sup));
  out.require(max_resid <= 1e-12, "max residual " + std::to_string(max_resid));
  char buf[80];
  std::snprintf(buf, sizeof buf, "sup_err=%.2e max_resid=%.2e", sup, max_resid);
  out.detail = buf;
  return out;
}

// 9. Field sampler: covariance Monte Carlo at 4 SE plus bit-identical
//    replicates across thread counts.
Outcome criterion9() {
  Outcome out;
  const double c = 1.0 / (8.0 * kPi * kPi);
  const int n = 1, w = 3;
  std::vector<double> coef(static_cast<std::size_t>(w * w), 0.0);
  coef[static_cast<std::size_t>((1 + n) * w + (1 + n))] = 0.5 * c;
  coef[static_cast<std::size_t>((-1 + n) * w + (-1 + n))] = 0.5 * c;
  coef[static_cast<std::size_t>((0 + n) * w + (0 + n))] = c;
  auto f = SpectralDensity2D::trig_poly(n, std::move(coef));

  const int reps = 200, win = 64;
  std::vector<FieldSample> fields(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r)
    fields[static_cast<std::size_t>(r)] =
        sample_field(f, win, 77, static_cast<std::uint64_t>(r));

  for (auto [u, v] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
    std::vector<double> est;
    for (const auto& g : fields) {
      double s = 0.0;
      int count = 0;
      for (int i = 0; i + u < win; ++i)
        for (int j = 0; j + v < win; ++j) {
          s += g(i, j) * g(i + u, j + v);
          ++count;
        }
      est.push_back(s / count);
    }
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= reps;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    const double se = std::sqrt(var / (reps - 1.0) / reps);
    const double want = f.covariance(u, v);
    out.require(std::abs(mean - want) <= 4.0 * se,
                "lag (" + std::to_string(u) + "," + std::to_string(v) +
                    ") off by " + std::to_string((mean - want) / se) + " SE");
  }

  // identical seed, serial vs 4 concurrent threads
  std::vector<FieldSample> serial(4), threaded(4);
  for (std::uint64_t r = 0; r < 4; ++r) serial[r] = sample_field(f, 48, 123456, r);
  std::vector<std::thread> pool;
  for (std::uint64_t r = 0; r < 4; ++r)
    pool.emplace_back([&, r] { threaded[r] = sample_field(f, 48, 123456, r); });
  for (auto& t : pool) t.join();
  for (std::size_t r = 0; r < 4; ++r)
    out.require(serial[r].values == threaded[r].values,
                "replicate " + std::to_string(r) + " differs across thread counts");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "combinatorial oracle equivalence", 10.0, criterion1},
    {2, "wigner sanity (N=1024, 5 replicates)", 120.0, criterion2},
    {3, "constant-density consistency (KS <= 0.06)", 120.0, criterion3},
    {4, "boxtimes via matrices (Uniform[1,2], N=2000)", 600.0, criterion4},
    {5, "additive shift identity + kappa2 gap", 600.0, criterion5},
    {6, "subordination density of eta-hat (mass, finiteness, atoms)", 300.0,
     criterion6},
    {7, "symmetrization invariance (KS <= 0.05)", 180.0, criterion7},
    {8, "subordination solver vs closed form", 30.0, criterion8},
    {9, "field sampler exactness + thread determinism", 120.0, criterion9},
};

int run_one(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = c.fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (elapsed > c.budget_s) {
    out.pass = false;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("over budget");
  }
  std::printf("[%s] criterion %d: %s (%.1fs / %.0fs)%s%s\n",
              out.pass ? "PASS" : "FAIL", c.id, c.name, elapsed, c.budget_s,
              out.detail.empty() ? "" : " -- ", out.detail.c_str());
  std::fflush(stdout);
  return out.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      only = std::atoi(argv[++i]);
    else if (std::strcmp(argv[i], "--list") == 0) {
      for (const auto& c : kCriteria)
        std::printf("%d: %s (budget %.0fs)\n", c.id, c.name, c.budget_s);
      return 0;
    }
  }
  std::printf("kernel backend: %s\n", kernels::active_backend().name);
  int failures = 0;
  for (const auto& c : kCriteria)
    if (only == 0 || c.id == only) failures += run_one(c);
  return failures;
}
