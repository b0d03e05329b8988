#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbohm/elvariation.hpp"
#include "qbohm/grid.hpp"
#include "qbohm/qpotential.hpp"
#include "qbohm/units.hpp"

namespace qbohm {

enum class ScenarioKind { exponent_scan, eigensolve, dynamics, trajectories, condition_check };

std::string to_string(ScenarioKind kind);

struct PotentialSpec {
  /// harmonic | well | free | two-gaussian-slits, or empty when `file` is set.
  std::string family;
  std::map<std::string, double> params;
  std::string file;
};

/// Initial state for dynamics and trajectories.
struct InitialSpec {
  /// gaussian | ground | two-gaussian-slits
  std::string family = "gaussian";
  Point center{0.0, 0.0};
  Point sigma{1.0, 1.0};
  Point momentum{0.0, 0.0};
};

/// Probe field for condition checks: a Gaussian mixture or a field file.
struct FieldSpec {
  std::vector<GaussianBump> bumps;
  std::string file;
};

struct SolverSpec {
  double tol_grad = 1e-8;
  long max_iterations = 50000;
  std::optional<double> step;
  int oracle_states = 1;

  ScanBounds bounds{};
  int probes = 10;
  double tolerance = 1e-3;

  double dt = 0.0;
  double oracle_dt = 0.0;
  double t_end = 1.0;
  std::vector<double> snapshots;

  int paths = 2000;
  int bins = 40;
  int histogram_axis = 0;
  int record_every = 1;

  int threads = 0;
};

/// Tolerances for the built-in checks of each scenario kind. Unset optional
/// checks are skipped.
struct CheckSpec {
  std::vector<std::array<int, 3>> expected_solutions;
  double min_separation = 0.1;

  double oracle_tolerance = 1e-6;
  std::optional<double> expected_lambda;
  double lambda_tolerance = 1e-3;
  double hj_tolerance = 1e-3;

  std::optional<double> max_residual;
  std::optional<double> min_residual;

  double max_drift_rate = 1e-6;
  double agreement = 1e-2;
  double width_tolerance = 1e-2;

  double min_p_value = 0.01;
  double max_minimum_paths = 1.0;
};

struct ScenarioConfig {
  int schema_version = 1;
  ScenarioKind kind = ScenarioKind::eigensolve;
  Grid grid = Grid(Axis{-10.0, 10.0, 512});
  PotentialSpec potential;
  InitialSpec initial;
  FieldSpec field;
  AnsatzExponents ansatz = AnsatzExponents::bohmian(-0.5);
  SolverSpec solver;
  Units units;
  std::optional<std::uint64_t> seed;
  std::string output = "out";
  CheckSpec checks;
  /// Directory of the config file; relative file references resolve against it.
  std::string base_dir;
};

struct ValidationResult {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  /// Config with every default filled in; empty when validation failed.
  nlohmann::ordered_json effective;
  bool ok() const { return errors.empty(); }
};

/// Full validation: every problem is reported, nothing is built unless the
/// whole document is valid.
ValidationResult validate_config(const nlohmann::json& raw, const std::string& base_dir = ".");
ValidationResult validate_config_text(const std::string& text, const std::string& base_dir = ".");
ValidationResult load_config(const std::string& path);

/// Serializes a config with all defaults spelled out. Only the sections that
/// the scenario kind uses are written.
nlohmann::ordered_json effective_json(const ScenarioConfig& config);
ScenarioKind parse_kind(const std::string& name);

}  // namespace qbohm
