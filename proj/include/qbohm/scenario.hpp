#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbohm/config.hpp"

namespace qbohm {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  /// "<=" or ">=": how measured is compared with tolerance.
  std::string comparison = "<=";
};

struct OutputFile {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunSummary {
  ScenarioKind kind = ScenarioKind::eigensolve;
  bool ok = false;
  /// Stage that threw, empty on success.
  std::string failed_stage;
  std::string error;
  double wall_time = 0.0;
  std::vector<CheckResult> checks;
  /// Every file written, except summary.json itself, in creation order.
  std::vector<OutputFile> inventory;
  nlohmann::ordered_json results;
  nlohmann::ordered_json effective_config;
  std::vector<std::string> warnings;
};

/// Runs the scenario and writes its outputs, effective_config.json and
/// summary.json into config.output. Module errors are caught and recorded in
/// the summary; ok is true iff no stage failed and every check passed.
RunSummary run_scenario(const ScenarioConfig& config, const std::vector<std::string>& warnings = {});

nlohmann::ordered_json summary_json(const RunSummary& summary);
std::string sha256_file(const std::string& path);

}  // namespace qbohm
