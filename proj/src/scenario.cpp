#include "freeconv/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "freeconv/kernels.hpp"
#include "freeconv/matrix_ensembles.hpp"
#include "freeconv/nc.hpp"
#include "freeconv/rng.hpp"
#include "freeconv/stieltjes.hpp"
#include "freeconv/version.hpp"

namespace freeconv {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;
constexpr double kEightPi2 = 8.0 * kPi * kPi;
constexpr std::uint64_t kTagDiagonal = 3;

const std::map<ScenarioId, std::string>& id_names() {
  static const std::map<ScenarioId, std::string> names = {
      {ScenarioId::kWignerSanity, "wigner_sanity"},
      {ScenarioId::kLemma1, "lemma1"},
      {ScenarioId::kPropositionSumMult, "proposition_sum_mult"},
      {ScenarioId::kFact3Separable, "fact3_separable"},
      {ScenarioId::kFact5Symmetrize, "fact5_symmetrize"},
      {ScenarioId::kFact1Freeness, "fact1_freeness"},
      {ScenarioId::kTheorem2Smoothness, "theorem2_smoothness"},
  };
  return names;
}

Taper taper_from_string(const std::string& s) {
  if (s == "raw") return Taper::kRaw;
  if (s == "fejer") return Taper::kFejer;
  if (s == "jackson") return Taper::kJackson;
  throw ValidationError("unknown taper '" + s + "' (raw|fejer|jackson)");
}

std::uint64_t stream_id(std::uint64_t slot, std::uint64_t replicate) {
  return (slot << 32) | replicate;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::max(
      1, std::min(count, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Ensemble {
  std::vector<EmpiricalSpectrum> spectra;  // indexed by replicate
  std::vector<double> pooled;              // sorted
  std::vector<double> mean_m, se_m;        // replicate-averaged moments
};

Ensemble run_ensemble(int replicates, int kmax,
                      const std::function<EmpiricalSpectrum(int)>& build) {
  Ensemble e;
  e.spectra.resize(static_cast<std::size_t>(replicates));
  parallel_for(replicates,
               [&](int rep) { e.spectra[static_cast<std::size_t>(rep)] = build(rep); });

  e.mean_m.assign(static_cast<std::size_t>(kmax), 0.0);
  e.se_m.assign(static_cast<std::size_t>(kmax), 0.0);
  std::vector<std::vector<double>> per_rep;
  per_rep.reserve(e.spectra.size());
  for (const auto& s : e.spectra) {
    per_rep.push_back(esd_moments(s, kmax));
    e.pooled.insert(e.pooled.end(), s.lambda.begin(), s.lambda.end());
  }
  std::sort(e.pooled.begin(), e.pooled.end());
  for (int k = 0; k < kmax; ++k) {
    double mean = 0.0;
    for (const auto& m : per_rep) mean += m[static_cast<std::size_t>(k)];
    mean /= static_cast<double>(replicates);
    double var = 0.0;
    for (const auto& m : per_rep) {
      const double d = m[static_cast<std::size_t>(k)] - mean;
      var += d * d;
    }
    e.mean_m[static_cast<std::size_t>(k)] = mean;
    e.se_m[static_cast<std::size_t>(k)] =
        replicates > 1 ? std::sqrt(var / (replicates - 1.0) /
                                   static_cast<double>(replicates))
                       : 0.0;
  }
  return e;
}

std::function<EmpiricalSpectrum(int)> gbar_builder(const SpectralDensity2D& f,
                                                   const ScenarioConfig& cfg,
                                                   std::uint64_t slot,
                                                   std::string name) {
  return [&f, &cfg, slot, name = std::move(name)](int rep) {
    const std::uint64_t stream = stream_id(slot, static_cast<std::uint64_t>(rep));
    SamplerOptions opts;
    opts.approx_degree = cfg.approx_degree;
    opts.taper = taper_from_string(cfg.taper);
    FieldSample g = sample_field(f, cfg.n, cfg.seed, stream, opts);
    return eigenvalues(build_gbar(g), name, cfg.seed, stream);
  };
}

struct MeasureSpec {
  Measure measure;
  std::optional<MomentSequence> exact;  // rational when the kind permits
};

MeasureSpec parse_measure_spec(const json& j, int kmax) {
  if (!j.is_object() || !j.contains("kind"))
    throw ValidationError("measure spec must be an object with a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    const double lo = j.at("lo").get<double>(), hi = j.at("hi").get<double>();
    return {Measure::uniform(lo, hi),
            uniform_interval_moments(rat_from_double(lo), rat_from_double(hi),
                                     kmax)};
  }
  if (kind == "point_mass") {
    const double c = j.at("c").get<double>();
    return {Measure::point_mass(c), point_mass_moments(rat_from_double(c), kmax)};
  }
  if (kind == "atomic") {
    auto locs = j.at("locations").get<std::vector<double>>();
    auto wts = j.at("weights").get<std::vector<double>>();
    std::vector<std::pair<Rat, Rat>> atoms;
    for (std::size_t i = 0; i < locs.size(); ++i)
      atoms.emplace_back(rat_from_double(locs[i]), rat_from_double(wts[i]));
    return {Measure::atomic(locs, wts), atomic_moments(atoms, kmax)};
  }
  if (kind == "semicircle") {
    const double t = j.at("t").get<double>();
    return {Measure::semicircle(t), semicircle_moments(rat_from_double(t), kmax)};
  }
  if (kind == "grid") {
    Measure m = Measure::from_json(j);
    return {m, std::nullopt};
  }
  throw ValidationError("measure spec: unknown kind '" + kind + "'");
}

/// c0 + c1 cos(x + 2y): even, nonnegative (c0 >= c1), not symmetric under
/// (x,y) -> (y,x). Second moment of the ESD limit is 8 pi^2 c0.
SpectralDensity2D default_asymmetric_density() {
  const double c0 = 1.0 / (4.0 * kPi * kPi);
  const double c1 = 1.0 / (8.0 * kPi * kPi);
  const int n = 2;
  const int w = 2 * n + 1;
  std::vector<double> coef(static_cast<std::size_t>(w * w), 0.0);
  auto at = [&](int jj, int kk) -> double& {
    return coef[static_cast<std::size_t>((jj + n) * w + (kk + n))];
  };
  at(0, 0) = c0;
  at(1, 2) = 0.5 * c1;
  at(-1, -2) = 0.5 * c1;
  return SpectralDensity2D::trig_poly(n, std::move(coef));
}

struct CriteriaLog {
  json arr = json::array();
  int exit_code = 0;

  void add(const std::string& name, double value, double threshold, bool pass,
           int fail_code = 1) {
    arr.push_back({{"name", name},
                   {"value", value},
                   {"threshold", threshold},
                   {"pass", pass},
                   {"code", pass ? 0 : fail_code}});
    if (!pass) exit_code = std::max(exit_code, fail_code);
  }
};

// Relative error scale for moment k: |exact_k| when meaningful, else the
// natural scale sigma^k (so zero-valued odd moments are judged in absolute
// terms on the distribution's own scale).
double moment_scale(const std::vector<double>& exact, int k1) {
  const double sigma =
      std::sqrt(std::max(std::abs(exact.size() >= 2 ? exact[1] : 1.0), 1e-12));
  return std::max(std::abs(exact[static_cast<std::size_t>(k1) - 1]),
                  std::pow(sigma, k1));
}

json moment_table_json(const std::vector<double>& mc, const std::vector<double>& se,
                       const std::vector<double>& exact,
                       const std::vector<std::string>& exact_str) {
  json table = json::array();
  for (std::size_t k = 0; k < mc.size(); ++k) {
    const double rel =
        std::abs(mc[k] - exact[k]) / moment_scale(exact, static_cast<int>(k) + 1);
    table.push_back({{"k", k + 1},
                     {"monte_carlo", mc[k]},
                     {"exact", exact[k]},
                     {"exact_str", exact_str[k]},
                     {"rel_err", rel},
                     {"std_err", se[k]}});
  }
  return table;
}

void compare_moments(CriteriaLog& crit, const std::string& prefix,
                     const std::vector<double>& mc, const std::vector<double>& exact,
                     int kmax, const ToleranceSet& tol) {
  for (int k = 1; k <= kmax; ++k) {
    const double rel = std::abs(mc[static_cast<std::size_t>(k) - 1] -
                                exact[static_cast<std::size_t>(k) - 1]) /
                       moment_scale(exact, k);
    const double thresh =
        (k <= 4 ? tol.moment_rel_lo : tol.moment_rel_hi) * tol.scale;
    crit.add(prefix + ".m" + std::to_string(k), rel, thresh, rel <= thresh);
  }
}

void write_moment_csv(const std::filesystem::path& path, const json& table) {
  std::ofstream out(path);
  out << "k,monte_carlo,exact,rel_err,std_err\n";
  out.precision(17);
  for (const auto& row : table)
    out << row.at("k").get<int>() << ',' << row.at("monte_carlo").get<double>()
        << ',' << row.at("exact").get<double>() << ','
        << row.at("rel_err").get<double>() << ','
        << row.at("std_err").get<double>() << '\n';
}

void write_manifest(const std::filesystem::path& path, const json& man) {
  std::ofstream out(path);
  out << man.dump(2) << '\n';
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return xs;
}

struct Context {
  std::filesystem::path dir;
  json man;
  CriteriaLog crit;
  json artifacts = json::object();
  json results = json::object();
};

void record_ensemble_streams(Context& ctx, const std::string& name,
                             std::uint64_t seed, std::uint64_t slot, int reps) {
  json streams = json::array();
  for (int r = 0; r < reps; ++r)
    streams.push_back({seed, stream_id(slot, static_cast<std::uint64_t>(r))});
  ctx.man["replicate_streams"][name] = streams;
}

void dump_spectra(Context& ctx, std::vector<const Ensemble*> ensembles) {
  std::vector<EmpiricalSpectrum> all;
  for (const Ensemble* e : ensembles)
    all.insert(all.end(), e->spectra.begin(), e->spectra.end());
  write_spectra_csv(ctx.dir / "spectra.csv", all);
  ctx.artifacts["spectra"] = "spectra.csv";
}

void dump_histogram(Context& ctx, const Ensemble& primary) {
  write_histogram_csv(ctx.dir / "histogram.csv", make_histogram(primary.pooled));
  ctx.artifacts["histogram"] = "histogram.csv";
}

// Density-profile checks shared by the proposition and theorem-2 pipelines:
// unit mass, finite pointwise values, solver residuals, and a clean atom scan.
void check_profile(Context& ctx, const ScenarioConfig& cfg,
                   const DensityProfile& profile, const Measure& eta,
                   double t_conv, const std::string& prefix) {
  const double mass = profile.mass();
  ctx.results[prefix]["mass"] = mass;
  ctx.results[prefix]["max_density"] = profile.max_density();
  double max_resid = 0.0;
  for (std::size_t i = 0; i < profile.residual.size(); ++i)
    max_resid = std::max(max_resid, profile.residual[i]);
  ctx.results[prefix]["max_residual"] = max_resid;
  ctx.results[prefix]["failed_points"] =
      static_cast<int>(profile.failures.size());

  ctx.crit.add(prefix + ".finite", static_cast<double>(profile.failures.size()),
               0.0, profile.all_ok(), 3);
  ctx.crit.add(prefix + ".mass", std::abs(mass - 1.0),
               cfg.tol.density_mass_abs * cfg.tol.scale,
               std::abs(mass - 1.0) <= cfg.tol.density_mass_abs * cfg.tol.scale);
  ctx.crit.add(prefix + ".residual", max_resid, cfg.tol.subord_residual,
               max_resid <= cfg.tol.subord_residual, 3);

  AtomScanReport scan = atom_scan(profile, eta, t_conv);
  ctx.results[prefix]["atom_flags"] = static_cast<int>(scan.flagged.size());
  ctx.crit.add(prefix + ".atom_flags", static_cast<double>(scan.flagged.size()),
               0.0, scan.clean());

  profile.write_csv(ctx.dir / "density.csv");
  ctx.artifacts["density"] = "density.csv";
}

// ---------------------------------------------------------------------------
// scenario pipelines
// ---------------------------------------------------------------------------

void run_wigner_sanity(const ScenarioConfig& cfg, Context& ctx) {
  record_ensemble_streams(ctx, "wigner", cfg.seed, 0, cfg.replicates);
  Ensemble e = run_ensemble(cfg.replicates, cfg.kmax, [&](int rep) {
    return eigenvalues(
        build_wigner(cfg.n, cfg.seed, stream_id(0, static_cast<std::uint64_t>(rep))),
        "wigner", cfg.seed, stream_id(0, static_cast<std::uint64_t>(rep)));
  });

  const Measure sc = Measure::semicircle(1.0);
  double ks_mean = 0.0;
  json ks_list = json::array();
  for (const auto& s : e.spectra) {
    const double d = ks_distance(s.to_measure(), sc);
    ks_list.push_back(d);
    ks_mean += d;
  }
  ks_mean /= static_cast<double>(cfg.replicates);
  ctx.results["ks"] = {{"mean", ks_mean}, {"per_replicate", ks_list}};
  ctx.crit.add("ks_mean", ks_mean, cfg.tol.ks * cfg.tol.scale,
               ks_mean <= cfg.tol.ks * cfg.tol.scale);

  MomentSequence exact = semicircle_moments(Rat(1), cfg.kmax);
  compare_moments(ctx.crit, "moments", e.mean_m, exact.as_doubles(), cfg.kmax,
                  cfg.tol);
  ctx.results["moment_table"] =
      moment_table_json(e.mean_m, e.se_m, exact.as_doubles(), exact.as_strings());
  write_moment_csv(ctx.dir / "moment_table.csv", ctx.results["moment_table"]);
  ctx.artifacts["moment_table"] = "moment_table.csv";

  ctx.man["overlay_reference"] = {{"kind", "semicircle"}, {"t", 1.0}};
  dump_spectra(ctx, {&e});
  dump_histogram(ctx, e);
}

void run_fact3(const ScenarioConfig& cfg, Context& ctx) {
  MeasureSpec mu = parse_measure_spec(cfg.measure_spec, cfg.kmax);
  SpectralDensity2D f =
      SpectralDensity2D::separable_from_measure(mu.measure, cfg.delta)
          .bandlimited(cfg.approx_degree, taper_from_string(cfg.taper));
  if (const auto* sp = std::get_if<SeparablePoly>(&f.rep()))
    ctx.results["compile"] = {{"degree", sp->coef.size() - 1},
                              {"taper", cfg.taper},
                              {"lift", sp->lift},
                              {"min_q", sp->min_value}};

  record_ensemble_streams(ctx, "gbar_f", cfg.seed, 0, cfg.replicates);
  Ensemble e = run_ensemble(cfg.replicates, cfg.kmax,
                            gbar_builder(f, cfg, 0, "gbar_f"));

  MomentSequence mu_m =
      mu.exact ? *mu.exact
               : MomentSequence::from_doubles(mu.measure.moments(cfg.kmax));
  MomentSequence exact =
      mult_conv_moments(mu_m, semicircle_moments(Rat(1), cfg.kmax), cfg.kmax);
  compare_moments(ctx.crit, "moments", e.mean_m, exact.as_doubles(), cfg.kmax,
                  cfg.tol);
  ctx.results["moment_table"] =
      moment_table_json(e.mean_m, e.se_m, exact.as_doubles(), exact.as_strings());
  write_moment_csv(ctx.dir / "moment_table.csv", ctx.results["moment_table"]);
  ctx.artifacts["moment_table"] = "moment_table.csv";

  dump_spectra(ctx, {&e});
  dump_histogram(ctx, e);
}

void run_lemma1(const ScenarioConfig& cfg, Context& ctx) {
  MeasureSpec mu = parse_measure_spec(cfg.measure_spec, cfg.kmax);
  const double alpha = cfg.alpha < 0.0 ? 1.0 / kEightPi2 : cfg.alpha;
  const double t_add = cfg.alpha < 0.0 ? 1.0 : kEightPi2 * cfg.alpha;
  ctx.results["alpha"] = alpha;
  ctx.results["t_add"] = t_add;

  SpectralDensity2D f =
      SpectralDensity2D::separable_from_measure(mu.measure, cfg.delta)
          .bandlimited(cfg.approx_degree, taper_from_string(cfg.taper));
  SpectralDensity2D f_shift = SpectralDensity2D::shifted(f, alpha);

  record_ensemble_streams(ctx, "gbar_f", cfg.seed, 0, cfg.replicates);
  record_ensemble_streams(ctx, "gbar_f_plus_alpha", cfg.seed, 1, cfg.replicates);
  Ensemble base = run_ensemble(cfg.replicates, cfg.kmax,
                               gbar_builder(f, cfg, 0, "gbar_f"));
  Ensemble shifted = run_ensemble(cfg.replicates, cfg.kmax,
                                  gbar_builder(f_shift, cfg, 1, "gbar_f_plus_alpha"));

  MomentSequence mu_m =
      mu.exact ? *mu.exact
               : MomentSequence::from_doubles(mu.measure.moments(cfg.kmax));
  MomentSequence nu_f =
      mult_conv_moments(mu_m, semicircle_moments(Rat(1), cfg.kmax), cfg.kmax);
  MomentSequence exact = add_conv_moments(
      nu_f, semicircle_moments(rat_from_double(t_add), cfg.kmax), cfg.kmax);

  compare_moments(ctx.crit, "moments", shifted.mean_m, exact.as_doubles(),
                  cfg.kmax, cfg.tol);
  ctx.results["moment_table"] = moment_table_json(
      shifted.mean_m, shifted.se_m, exact.as_doubles(), exact.as_strings());
  write_moment_csv(ctx.dir / "moment_table.csv", ctx.results["moment_table"]);
  ctx.artifacts["moment_table"] = "moment_table.csv";

  // Variance gap between the two ensembles is the added semicircle variance.
  const double kappa2_base = base.mean_m[1] - base.mean_m[0] * base.mean_m[0];
  const double kappa2_shift =
      shifted.mean_m[1] - shifted.mean_m[0] * shifted.mean_m[0];
  const double gap = kappa2_shift - kappa2_base;
  const double gap_rel = std::abs(gap - t_add) / t_add;
  ctx.results["kappa2_gap"] = {{"base", kappa2_base},
                               {"shifted", kappa2_shift},
                               {"gap", gap},
                               {"expected", t_add}};
  ctx.crit.add("kappa2_gap", gap_rel, cfg.tol.kappa2_gap_rel * cfg.tol.scale,
               gap_rel <= cfg.tol.kappa2_gap_rel * cfg.tol.scale);

  dump_spectra(ctx, {&base, &shifted});
  dump_histogram(ctx, shifted);
}

void run_proposition(const ScenarioConfig& cfg, Context& ctx) {
  MeasureSpec mu = parse_measure_spec(cfg.measure_spec, cfg.kmax);
  if (!(cfg.delta > 0.0))
    throw ValidationError("proposition_sum_mult: delta must be positive");
  if (mu.measure.support_lo() < cfg.delta * (1.0 - 1e-12) - 1e-12)
    throw ValidationError(
        "proposition_sum_mult: measure violates mu([delta, inf)) = 1");

  const double alpha = cfg.delta * cfg.delta / kEightPi2;
  const double t_conv = cfg.delta * cfg.delta;  // 8 pi^2 alpha
  ctx.results["alpha"] = alpha;
  ctx.results["t_conv"] = t_conv;

  SpectralDensity2D f =
      SpectralDensity2D::separable_from_measure(mu.measure, cfg.delta)
          .bandlimited(cfg.approx_degree, taper_from_string(cfg.taper));
  if (const auto* sp = std::get_if<SeparablePoly>(&f.rep()))
    ctx.results["compile"] = {{"degree", sp->coef.size() - 1},
                              {"taper", cfg.taper},
                              {"lift", sp->lift},
                              {"min_q", sp->min_value}};
  SpectralDensity2D h = SpectralDensity2D::minus_constant(f, alpha);
  SpectralDensity2D h_plus = SpectralDensity2D::shifted(h, alpha);

  record_ensemble_streams(ctx, "gbar_h_plus_alpha", cfg.seed, 0, cfg.replicates);
  record_ensemble_streams(ctx, "gbar_h", cfg.seed, 1, cfg.replicates);
  Ensemble full = run_ensemble(cfg.replicates, cfg.kmax,
                               gbar_builder(h_plus, cfg, 0, "gbar_h_plus_alpha"));
  Ensemble eta = run_ensemble(cfg.replicates, cfg.kmax,
                              gbar_builder(h, cfg, 1, "gbar_h"));

  MomentSequence mu_m =
      mu.exact ? *mu.exact
               : MomentSequence::from_doubles(mu.measure.moments(cfg.kmax));
  MomentSequence exact =
      mult_conv_moments(mu_m, semicircle_moments(Rat(1), cfg.kmax), cfg.kmax);

  // (1) Monte Carlo under (f - alpha) + alpha reproduces mu x semicircle.
  compare_moments(ctx.crit, "mc_moments", full.mean_m, exact.as_doubles(),
                  cfg.kmax, cfg.tol);
  ctx.results["moment_table"] = moment_table_json(
      full.mean_m, full.se_m, exact.as_doubles(), exact.as_strings());
  write_moment_csv(ctx.dir / "moment_table.csv", ctx.results["moment_table"]);
  ctx.artifacts["moment_table"] = "moment_table.csv";

  // (2) eta-hat + semicircle(delta^2) reproduces the same moments.
  std::vector<double> eta_pooled_m =
      kernels::power_sums(eta.pooled, cfg.kmax);
  for (double& v : eta_pooled_m) v /= static_cast<double>(eta.pooled.size());
  MomentSequence eta_conv = add_conv_moments(
      MomentSequence::from_doubles(eta_pooled_m),
      semicircle_moments(rat_from_double(t_conv), cfg.kmax), cfg.kmax);
  compare_moments(ctx.crit, "eta_conv_moments", eta_conv.as_doubles(),
                  exact.as_doubles(), cfg.kmax, cfg.tol);
  ctx.results["eta_moments"] = eta_pooled_m;
  ctx.results["eta_conv_moments"] = eta_conv.as_doubles();

  // (3) Subordination density of eta-hat + semicircle(delta^2).
  Measure eta_hat = Measure::empirical(eta.pooled);
  const double edge = 2.0 * std::sqrt(t_conv);
  auto grid = linspace(eta.pooled.front() - edge - 0.5,
                       eta.pooled.back() + edge + 0.5, cfg.grid_points);
  SubordinationOptions sopts;
  sopts.tol = cfg.tol.subord_residual;
  DensityProfile profile =
      density_of_plus_semicircle(eta_hat, t_conv, grid, cfg.eps, sopts);
  check_profile(ctx, cfg, profile, eta_hat, t_conv, "density");

  dump_spectra(ctx, {&full, &eta});
  dump_histogram(ctx, full);
  ctx.man["overlay_reference"] = {{"kind", "profile"}};
}

void run_fact5(const ScenarioConfig& cfg, Context& ctx) {
  SpectralDensity2D f = cfg.density_spec.is_null()
                            ? default_asymmetric_density()
                            : SpectralDensity2D::from_json(cfg.density_spec);
  SpectralDensity2D g = f.symmetrize();

  record_ensemble_streams(ctx, "gbar_f", cfg.seed, 0, cfg.replicates);
  record_ensemble_streams(ctx, "gbar_sym", cfg.seed, 1, cfg.replicates);
  Ensemble ef = run_ensemble(cfg.replicates, cfg.kmax,
                             gbar_builder(f, cfg, 0, "gbar_f"));
  Ensemble eg = run_ensemble(cfg.replicates, cfg.kmax,
                             gbar_builder(g, cfg, 1, "gbar_sym"));

  const double ks = ks_distance(Measure::empirical(ef.pooled),
                                Measure::empirical(eg.pooled));
  ctx.results["ks_between"] = ks;
  ctx.results["moments_f"] = ef.mean_m;
  ctx.results["moments_sym"] = eg.mean_m;
  ctx.crit.add("ks_between", ks, cfg.tol.ks * cfg.tol.scale,
               ks <= cfg.tol.ks * cfg.tol.scale);

  dump_spectra(ctx, {&ef, &eg});
  dump_histogram(ctx, ef);
}

void run_fact1(const ScenarioConfig& cfg, Context& ctx) {
  json spec = cfg.measure_spec;
  if (spec.is_null())
    spec = {{"kind", "atomic"},
            {"locations", {-1.0, 1.0}},
            {"weights", {0.5, 0.5}}};
  MeasureSpec mu_b = parse_measure_spec(spec, cfg.kmax);

  record_ensemble_streams(ctx, "wigner_plus_diag", cfg.seed, 0, cfg.replicates);
  Ensemble e = run_ensemble(cfg.replicates, cfg.kmax, [&](int rep) {
    const std::uint64_t stream = stream_id(0, static_cast<std::uint64_t>(rep));
    SymmetricMatrix m = build_wigner(cfg.n, cfg.seed, stream);
    GaussianStream rng(cfg.seed, stream);
    for (int i = 0; i < cfg.n; ++i) {
      const double u = rng.uniform(static_cast<std::uint64_t>(i), kTagDiagonal);
      m.set(i, i, m(i, i) + mu_b.measure.quantile(u));
    }
    return eigenvalues(m, "wigner_plus_diag", cfg.seed, stream);
  });

  MomentSequence mu_m =
      mu_b.exact ? *mu_b.exact
                 : MomentSequence::from_doubles(mu_b.measure.moments(cfg.kmax));
  MomentSequence exact =
      add_conv_moments(mu_m, semicircle_moments(Rat(1), cfg.kmax), cfg.kmax);
  compare_moments(ctx.crit, "moments", e.mean_m, exact.as_doubles(), cfg.kmax,
                  cfg.tol);
  ctx.results["moment_table"] =
      moment_table_json(e.mean_m, e.se_m, exact.as_doubles(), exact.as_strings());
  write_moment_csv(ctx.dir / "moment_table.csv", ctx.results["moment_table"]);
  ctx.artifacts["moment_table"] = "moment_table.csv";

  dump_spectra(ctx, {&e});
  dump_histogram(ctx, e);
}

void run_theorem2(const ScenarioConfig& cfg, Context& ctx) {
  SpectralDensity2D f = cfg.density_spec.is_null()
                            ? default_asymmetric_density()
                            : SpectralDensity2D::from_json(cfg.density_spec);

  const double ess = f.ess_inf_sym();
  ctx.results["ess_inf_sym"] = ess;
  if (!(ess > 0.0))
    throw ValidationError(
        "theorem2_smoothness: ess inf [f(x,y) + f(y,x)] must be positive");

  const double shift = 0.5 * ess;          // g >= shift pointwise
  const double t_conv = kEightPi2 * shift;  // semicircle variance in the split
  ctx.results["shift"] = shift;
  ctx.results["t_conv"] = t_conv;

  SpectralDensity2D g = f.symmetrize();
  SpectralDensity2D h = SpectralDensity2D::minus_constant(g, shift);

  record_ensemble_streams(ctx, "gbar_f", cfg.seed, 0, cfg.replicates);
  record_ensemble_streams(ctx, "gbar_h", cfg.seed, 1, cfg.replicates);
  Ensemble ef = run_ensemble(cfg.replicates, cfg.kmax,
                             gbar_builder(f, cfg, 0, "gbar_f"));
  Ensemble eh = run_ensemble(cfg.replicates, cfg.kmax,
                             gbar_builder(h, cfg, 1, "gbar_h"));

  // nu_f moments vs the additive split eta-hat + semicircle(8 pi^2 shift).
  std::vector<double> eta_m = kernels::power_sums(eh.pooled, cfg.kmax);
  for (double& v : eta_m) v /= static_cast<double>(eh.pooled.size());
  MomentSequence split = add_conv_moments(
      MomentSequence::from_doubles(eta_m),
      semicircle_moments(rat_from_double(t_conv), cfg.kmax), cfg.kmax);
  compare_moments(ctx.crit, "split_vs_mc", split.as_doubles(), ef.mean_m,
                  cfg.kmax, cfg.tol);
  ctx.results["moments_f"] = ef.mean_m;
  ctx.results["split_moments"] = split.as_doubles();

  Measure eta_hat = Measure::empirical(eh.pooled);
  const double edge = 2.0 * std::sqrt(t_conv);
  auto grid = linspace(eh.pooled.front() - edge - 0.5,
                       eh.pooled.back() + edge + 0.5, cfg.grid_points);
  SubordinationOptions sopts;
  sopts.tol = cfg.tol.subord_residual;
  DensityProfile profile =
      density_of_plus_semicircle(eta_hat, t_conv, grid, cfg.eps, sopts);
  check_profile(ctx, cfg, profile, eta_hat, t_conv, "density");

  // Moment consistency of the recovered density against the exact split,
  // k <= 4 within 2 percent (compact support, eps <= 1e-4).
  for (int k = 1; k <= std::min(cfg.kmax, 4); ++k) {
    std::vector<double> integrand(profile.x.size());
    for (std::size_t i = 0; i < profile.x.size(); ++i)
      integrand[i] = std::pow(profile.x[i], k) * profile.density[i];
    double mk = 0.0;
    for (std::size_t i = 0; i + 1 < profile.x.size(); ++i)
      mk += 0.5 * (integrand[i] + integrand[i + 1]) *
            (profile.x[i + 1] - profile.x[i]);
    const double rel = std::abs(mk - split.as_doubles()[static_cast<std::size_t>(k) - 1]) /
                       moment_scale(split.as_doubles(), k);
    ctx.crit.add("density_moment.m" + std::to_string(k), rel,
                 0.02 * cfg.tol.scale, rel <= 0.02 * cfg.tol.scale);
  }

  dump_spectra(ctx, {&ef, &eh});
  dump_histogram(ctx, ef);
  ctx.man["overlay_reference"] = {{"kind", "profile"}};
}

}  // namespace

// ---------------------------------------------------------------------------
// public interface
// ---------------------------------------------------------------------------

std::string to_string(ScenarioId id) { return id_names().at(id); }

std::optional<ScenarioId> scenario_from_string(const std::string& s) {
  for (const auto& [id, name] : id_names())
    if (name == s) return id;
  return std::nullopt;
}

ScenarioConfig ScenarioConfig::defaults(ScenarioId id) {
  ScenarioConfig cfg;
  cfg.id = id;
  switch (id) {
    case ScenarioId::kWignerSanity:
      cfg.n = 1024;
      cfg.replicates = 5;
      cfg.kmax = 4;
      break;
    case ScenarioId::kLemma1:
    case ScenarioId::kFact3Separable:
    case ScenarioId::kPropositionSumMult:
      cfg.n = 2000;
      cfg.replicates = 10;
      cfg.kmax = 6;
      cfg.measure_spec = {{"kind", "uniform"}, {"lo", 1.0}, {"hi", 2.0}};
      cfg.delta = 1.0;
      break;
    case ScenarioId::kFact5Symmetrize:
    case ScenarioId::kTheorem2Smoothness:
      cfg.n = 1024;
      cfg.replicates = 5;
      cfg.kmax = 4;
      break;
    case ScenarioId::kFact1Freeness:
      cfg.n = 1024;
      cfg.replicates = 5;
      cfg.kmax = 4;
      break;
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  if (!j.contains("scenario"))
    throw ValidationError("config: missing 'scenario'");
  auto id = scenario_from_string(j.at("scenario").get<std::string>());
  if (!id)
    throw ValidationError("config: unknown scenario '" +
                          j.at("scenario").get<std::string>() + "'");
  ScenarioConfig cfg = defaults(*id);
  for (const auto& [key, value] : j.items()) {
    if (key == "scenario" || key == "comment" || key == "description") continue;
    if (key == "n") cfg.n = value.get<int>();
    else if (key == "replicates") cfg.replicates = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "kmax") cfg.kmax = value.get<int>();
    else if (key == "measure") cfg.measure_spec = value;
    else if (key == "density") cfg.density_spec = value;
    else if (key == "delta") cfg.delta = value.get<double>();
    else if (key == "alpha") cfg.alpha = value.get<double>();
    else if (key == "approx_degree") cfg.approx_degree = value.get<int>();
    else if (key == "taper") cfg.taper = value.get<std::string>();
    else if (key == "eps") cfg.eps = value.get<double>();
    else if (key == "grid_points") cfg.grid_points = value.get<int>();
    else if (key == "tolerance_scale") cfg.tol.scale = value.get<double>();
    else if (key == "out") cfg.out_dir = value.get<std::string>();
    else if (key == "tolerances") {
      const json& t = value;
      cfg.tol.moment_rel_lo = t.value("moment_rel_lo", cfg.tol.moment_rel_lo);
      cfg.tol.moment_rel_hi = t.value("moment_rel_hi", cfg.tol.moment_rel_hi);
      cfg.tol.ks = t.value("ks", cfg.tol.ks);
      cfg.tol.kappa2_gap_rel = t.value("kappa2_gap_rel", cfg.tol.kappa2_gap_rel);
      cfg.tol.density_mass_abs =
          t.value("density_mass_abs", cfg.tol.density_mass_abs);
      cfg.tol.subord_residual =
          t.value("subord_residual", cfg.tol.subord_residual);
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

json ScenarioConfig::to_json() const {
  json j{{"scenario", freeconv::to_string(id)},
         {"n", n},
         {"replicates", replicates},
         {"seed", seed},
         {"kmax", kmax},
         {"delta", delta},
         {"alpha", alpha},
         {"approx_degree", approx_degree},
         {"taper", taper},
         {"eps", eps},
         {"grid_points", grid_points},
         {"tolerance_scale", tol.scale},
         {"tolerances",
          {{"moment_rel_lo", tol.moment_rel_lo},
           {"moment_rel_hi", tol.moment_rel_hi},
           {"ks", tol.ks},
           {"kappa2_gap_rel", tol.kappa2_gap_rel},
           {"density_mass_abs", tol.density_mass_abs},
           {"subord_residual", tol.subord_residual}}}};
  if (!measure_spec.is_null()) j["measure"] = measure_spec;
  if (!density_spec.is_null()) j["density"] = density_spec;
  if (!out_dir.empty()) j["out"] = out_dir.string();
  return j;
}

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("FREECONV_OUT")) return env;
  return "runs";
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  if (cfg.n < 16) throw ValidationError("config: N must be >= 16");
  if (cfg.replicates < 1) throw ValidationError("config: replicates must be >= 1");
  if (cfg.kmax < 1 || cfg.kmax > 8)
    throw ValidationError("config: kmax must be in [1, 8]");

  Context ctx;
  ctx.dir = cfg.out_dir.empty()
                ? default_output_root() /
                      (freeconv::to_string(cfg.id) + "-seed" +
                       std::to_string(cfg.seed))
                : cfg.out_dir;
  std::filesystem::create_directories(ctx.dir);

  ctx.man = {{"schema", "freeconv-manifest-v1"},
             {"library_version", kVersion},
             {"scenario", freeconv::to_string(cfg.id)},
             {"status", "running"},
             {"config", cfg.to_json()},
             {"kernel_backend", kernels::active_backend().name},
             {"replicate_streams", json::object()}};
  const auto manifest_path = ctx.dir / "manifest.json";
  write_manifest(manifest_path, ctx.man);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.id) {
      case ScenarioId::kWignerSanity: run_wigner_sanity(cfg, ctx); break;
      case ScenarioId::kLemma1: run_lemma1(cfg, ctx); break;
      case ScenarioId::kPropositionSumMult: run_proposition(cfg, ctx); break;
      case ScenarioId::kFact3Separable: run_fact3(cfg, ctx); break;
      case ScenarioId::kFact5Symmetrize: run_fact5(cfg, ctx); break;
      case ScenarioId::kFact1Freeness: run_fact1(cfg, ctx); break;
      case ScenarioId::kTheorem2Smoothness: run_theorem2(cfg, ctx); break;
    }
  } catch (const ValidationError& e) {
    ctx.man["status"] = "failed";
    ctx.man["error"] = {{"type", "validation"}, {"message", e.what()}};
    ctx.man["exit_code"] = 2;
    write_manifest(manifest_path, ctx.man);
    return {ctx.man, manifest_path, 2};
  } catch (const std::exception& e) {
    ctx.man["status"] = "failed";
    ctx.man["error"] = {{"type", "numeric"}, {"message", e.what()}};
    ctx.man["exit_code"] = 3;
    write_manifest(manifest_path, ctx.man);
    return {ctx.man, manifest_path, 3};
  }
  const auto t1 = std::chrono::steady_clock::now();

  ctx.man["status"] = "complete";
  ctx.man["results"] = ctx.results;
  ctx.man["criteria"] = ctx.crit.arr;
  ctx.man["artifacts"] = ctx.artifacts;
  ctx.man["timings"] = {
      {"total_s", std::chrono::duration<double>(t1 - t0).count()}};
  ctx.man["exit_code"] = ctx.crit.exit_code;
  write_manifest(manifest_path, ctx.man);
  return {ctx.man, manifest_path, ctx.crit.exit_code};
}

const std::vector<ScenarioInfo>& list_scenarios() {
  static const std::vector<ScenarioInfo> infos = {
      {"wigner_sanity",
       "Wigner ESD against the semicircle law: KS distance and Catalan moment "
       "targets.",
       {"n", "replicates", "seed", "kmax"}},
      {"lemma1",
       "Adding a constant alpha to the spectral density shifts the ESD limit "
       "by free additive convolution with a semicircle of variance 8 pi^2 "
       "alpha.",
       {"n", "replicates", "seed", "kmax", "measure", "alpha"}},
      {"proposition_sum_mult",
       "For mu supported in [delta, inf), mu boxtimes semicircle equals "
       "eta boxplus semicircle(delta^2); moments match and the subordination "
       "density is atom-free.",
       {"n", "replicates", "seed", "kmax", "measure", "delta"}},
      {"fact3_separable",
       "Under the separable density r(x) r(y) built from the quantile map of "
       "mu, the ESD limit is mu boxtimes semicircle.",
       {"n", "replicates", "seed", "kmax", "measure"}},
      {"fact5_symmetrize",
       "The ESD limit is invariant under f(x,y) -> (f(x,y) + f(y,x)) / 2.",
       {"n", "replicates", "seed"}},
      {"fact1_freeness",
       "Wigner plus an independent diagonal: averaged ESD moments match the "
       "free additive convolution of the diagonal law with the semicircle.",
       {"n", "replicates", "seed", "kmax", "measure"}},
      {"theorem2_smoothness",
       "When ess inf [f(x,y) + f(y,x)] > 0 the ESD limit splits off a "
       "semicircle component; its subordination density is atom-free with "
       "unit mass.",
       {"n", "replicates", "seed", "kmax", "density"}},
  };
  return infos;
}

const ScenarioInfo& scenario_info(const std::string& id) {
  for (const auto& info : list_scenarios())
    if (info.id == id) return info;
  throw NotFoundError("unknown scenario '" + id + "'");
}

std::optional<PlotKind> plot_kind_from_string(const std::string& s) {
  if (s == "histogram") return PlotKind::kHistogram;
  if (s == "density_overlay") return PlotKind::kDensityOverlay;
  if (s == "moment_table") return PlotKind::kMomentTable;
  return std::nullopt;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw NotFoundError("cannot open " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> primary_eigenvalues(const json& man,
                                        const std::filesystem::path& dir) {
  if (!man.contains("artifacts") || !man["artifacts"].contains("spectra"))
    throw NotFoundError("manifest has no spectra artifact");
  auto rows = read_csv(dir / man["artifacts"]["spectra"].get<std::string>());
  if (rows.size() < 2) throw NotFoundError("spectra artifact is empty");
  const std::string primary = rows[1][1];  // first data row's ensemble
  std::vector<double> vals;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i][1] == primary) vals.push_back(std::stod(rows[i][0]));
  return vals;
}

}  // namespace

std::filesystem::path emit_plot_data(const std::filesystem::path& manifest_path,
                                     PlotKind kind, std::filesystem::path out) {
  std::ifstream in(manifest_path);
  if (!in) throw NotFoundError("cannot open " + manifest_path.string());
  json man = json::parse(in);
  const auto dir = manifest_path.parent_path();

  if (kind == PlotKind::kMomentTable) {
    if (!man.contains("results") || !man["results"].contains("moment_table"))
      throw NotFoundError("manifest has no moment table");
    if (out.empty()) out = dir / "plot_moment_table.csv";
    write_moment_csv(out, man["results"]["moment_table"]);
    return out;
  }

  if (kind == PlotKind::kHistogram) {
    auto vals = primary_eigenvalues(man, dir);
    if (out.empty()) out = dir / "plot_histogram.csv";
    write_histogram_csv(out, make_histogram(vals));
    return out;
  }

  // density_overlay: empirical histogram (density scale) next to the
  // reference density (subordination profile or closed-form semicircle).
  auto vals = primary_eigenvalues(man, dir);
  Histogram h = make_histogram(vals);
  std::vector<double> centers(h.mass.size()), empirical(h.mass.size());
  for (std::size_t i = 0; i < h.mass.size(); ++i) {
    centers[i] = 0.5 * (h.left[i] + h.right[i]);
    empirical[i] = h.mass[i] / (h.right[i] - h.left[i]);
  }

  std::vector<double> reference(centers.size(), 0.0);
  const json overlay = man.value("overlay_reference", json());
  if (overlay.is_object() && overlay.value("kind", "") == "semicircle") {
    const double t = overlay.at("t").get<double>();
    for (std::size_t i = 0; i < centers.size(); ++i)
      reference[i] = semicircle_density(t, centers[i]);
  } else if (man.contains("artifacts") && man["artifacts"].contains("density")) {
    auto rows = read_csv(dir / man["artifacts"]["density"].get<std::string>());
    std::vector<double> xs, ds;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      xs.push_back(std::stod(rows[i][0]));
      ds.push_back(std::stod(rows[i][1]));
    }
    for (std::size_t i = 0; i < centers.size(); ++i) {
      auto it = std::lower_bound(xs.begin(), xs.end(), centers[i]);
      if (it == xs.begin() || it == xs.end()) continue;
      const auto k = static_cast<std::size_t>(it - xs.begin());
      const double s = (centers[i] - xs[k - 1]) / (xs[k] - xs[k - 1]);
      reference[i] = ds[k - 1] * (1.0 - s) + ds[k] * s;
    }
  } else {
    throw NotFoundError("manifest has neither a density artifact nor an "
                        "overlay reference");
  }

  if (out.empty()) out = dir / "plot_density_overlay.csv";
  std::ofstream o(out);
  o << "x,empirical_hist,subordination_density\n";
  o.precision(17);
  for (std::size_t i = 0; i < centers.size(); ++i)
    o << centers[i] << ',' << empirical[i] << ',' << reference[i] << '\n';
  return out;
}

}  // namespace freeconv
