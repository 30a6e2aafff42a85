#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeconv/spectral_density.hpp"

namespace freeconv {

enum class ScenarioId {
  kWignerSanity,
  kLemma1,
  kPropositionSumMult,
  kFact3Separable,
  kFact5Symmetrize,
  kFact1Freeness,
  kTheorem2Smoothness,
};

std::string to_string(ScenarioId id);
std::optional<ScenarioId> scenario_from_string(const std::string& s);

/// Comparison tolerances. The defaults are the locked acceptance values;
/// `scale` (--tolerance-scale) multiplies the statistical tolerances but
/// never the solver residual.
struct ToleranceSet {
  double moment_rel_lo = 0.05;    // k <= 4
  double moment_rel_hi = 0.10;    // k in {5, 6}
  double ks = 0.05;
  double kappa2_gap_rel = 0.07;
  double density_mass_abs = 0.02;
  double subord_residual = 1e-12;
  double scale = 1.0;
};

struct ScenarioConfig {
  ScenarioId id = ScenarioId::kWignerSanity;
  int n = 1024;
  int replicates = 5;
  std::uint64_t seed = 20250810;
  int kmax = 4;
  nlohmann::json measure_spec;  // see docs/config_schema.json
  nlohmann::json density_spec;  // optional SpectralDensity2D JSON
  double delta = 1.0;           // proposition hypothesis mu([delta, inf)) = 1
  double alpha = -1.0;          // lemma1 shift; < 0 means 1/(8 pi^2)
  int approx_degree = 256;
  std::string taper = "jackson";
  double eps = 1e-4;       // density recovery smoothing
  int grid_points = 801;   // density grid resolution
  ToleranceSet tol;
  std::filesystem::path out_dir;  // empty: default root (FREECONV_OUT or ./runs)

  static ScenarioConfig defaults(ScenarioId id);
  /// Parse a config document: {"scenario": "...", ...overrides}.
  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RunResult {
  nlohmann::json manifest;
  std::filesystem::path manifest_path;
  /// 0 = all criteria pass, 1 = tolerance failure,
  /// 2 = config/hypothesis validation failure, 3 = numeric/solver failure.
  int exit_code = 0;
};

/// Execute a scenario pipeline: writes manifest.json (status "running"
/// first, finalized afterward) plus CSV artifacts under the output
/// directory, and returns per-criterion pass/fail.
RunResult run_scenario(const ScenarioConfig& cfg);

struct ScenarioInfo {
  std::string id;
  std::string description;
  std::vector<std::string> required_fields;
};

const std::vector<ScenarioInfo>& list_scenarios();
const ScenarioInfo& scenario_info(const std::string& id);  // NotFoundError if unknown

enum class PlotKind { kHistogram, kDensityOverlay, kMomentTable };
std::optional<PlotKind> plot_kind_from_string(const std::string& s);

/// Derive a plot-ready CSV from a finished run. Reads the manifest and the
/// artifacts it references; throws NotFoundError when the needed artifact
/// was not produced by that scenario.
std::filesystem::path emit_plot_data(const std::filesystem::path& manifest_path,
                                     PlotKind kind,
                                     std::filesystem::path out = {});

/// Default output root: the FREECONV_OUT environment variable when set,
/// otherwise ./runs (the only environment variable the library consults).
std::filesystem::path default_output_root();

}  // namespace freeconv
