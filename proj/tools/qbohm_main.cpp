#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbohm/config.hpp"
#include "qbohm/error.hpp"
#include "qbohm/scenario.hpp"

namespace {

using nlohmann::json;

constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

bool read_json(const std::string& path, json& out) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "config error: cannot read " << path << '\n';
    return false;
  }
  try {
    out = json::parse(in);
  } catch (const json::parse_error& e) {
    std::cerr << "config error: " << path << " is not valid JSON: " << e.what() << '\n';
    return false;
  }
  return true;
}

std::string base_dir_of(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  return dir.empty() ? "." : dir.string();
}

int report_validation(const qbohm::ValidationResult& v) {
  for (const std::string& w : v.warnings) std::cerr << "warning: " << w << '\n';
  if (v.ok()) return 0;
  for (const std::string& e : v.errors) std::cerr << "config error: " << e << '\n';
  return kExitConfig;
}

int execute(const json& raw, const std::string& base_dir) {
  const qbohm::ValidationResult v = qbohm::validate_config(raw, base_dir);
  if (int rc = report_validation(v)) return rc;
  const qbohm::RunSummary s = qbohm::run_scenario(*v.config, v.warnings);
  for (const qbohm::CheckResult& c : s.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.measured << ' ' << c.comparison << ' '
              << c.tolerance << '\n';
  if (!s.failed_stage.empty()) std::cerr << "error: " << s.error << '\n';
  std::cout << "results: " << s.results.dump() << '\n';
  std::cout << "summary: " << (std::filesystem::path(v.config->output) / "summary.json").string() << '\n';
  return s.ok ? 0 : kExitFailed;
}

bool parse_range(const std::string& text, int& lo, int& hi) {
  const auto colon = text.find(':');
  try {
    std::size_t used = 0;
    if (colon == std::string::npos) {
      lo = hi = std::stoi(text, &used);
      return used == text.size();
    }
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    lo = std::stoi(a, &used);
    if (used != a.size()) return false;
    hi = std::stoi(b, &used);
    return used == b.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational Bohmian quantum potential toolkit"};
  app.require_subcommand(1);

  std::string run_config, out_dir;
  std::uint64_t seed = 0;
  int threads = -1;
  auto* run = app.add_subcommand("run", "Run a scenario described by a JSON config");
  run->add_option("config", run_config, "Scenario config file")->required();
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides the config)");
  run->add_option("--threads", threads, "Worker threads (0 = QBOHM_THREADS or all cores)");

  std::string validate_config_path;
  auto* validate = app.add_subcommand("validate", "Validate a config and print it with defaults filled in");
  validate->add_option("config", validate_config_path, "Scenario config file")->required();

  std::string bounds_text = "-2:2,-2:2,-2:2", scan_out = "scan_out";
  int probes = 10, points = 512;
  std::uint64_t scan_seed = 42;
  double tolerance = 1e-3;
  int scan_threads = 0;
  auto* scan = app.add_subcommand("scan", "Exponent scan of the admissibility condition");
  scan->add_option("--bounds", bounds_text, "Exponent ranges m0:m1,n0:n1,p0:p1")->capture_default_str();
  scan->add_option("--probes", probes, "Number of random probe fields")->capture_default_str();
  scan->add_option("--seed", scan_seed, "Probe seed")->capture_default_str();
  scan->add_option("--points", points, "Grid points on [-10, 10]")->capture_default_str();
  scan->add_option("--tolerance", tolerance, "Normalized residual tolerance")->capture_default_str();
  scan->add_option("--out", scan_out, "Output directory")->capture_default_str();
  scan->add_option("--threads", scan_threads, "Worker threads (0 = QBOHM_THREADS or all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      json raw;
      if (!read_json(run_config, raw)) return kExitConfig;
      if (raw.is_object()) {
        if (*out_opt) raw["output"] = out_dir;
        if (*seed_opt) raw["seed"] = seed;
        if (threads >= 0) raw["solver"]["threads"] = threads;
      }
      return execute(raw, base_dir_of(run_config));
    }
    if (*validate) {
      json raw;
      if (!read_json(validate_config_path, raw)) return kExitConfig;
      const qbohm::ValidationResult v = qbohm::validate_config(raw, base_dir_of(validate_config_path));
      if (int rc = report_validation(v)) return rc;
      std::cout << v.effective.dump(2) << '\n';
      return 0;
    }
    if (*scan) {
      int r[6];
      std::stringstream ss(bounds_text);
      std::string part;
      int k = 0;
      bool ok = true;
      while (std::getline(ss, part, ',')) {
        if (k >= 3 || !parse_range(part, r[2 * k], r[2 * k + 1])) ok = false;
        ++k;
      }
      if (!ok || k != 3) {
        std::cerr << "usage error: --bounds must look like m0:m1,n0:n1,p0:p1\n";
        return kExitConfig;
      }
      json raw = {{"schema_version", 1},
                  {"kind", "exponent-scan"},
                  {"grid", {{"min", {-10.0}}, {"max", {10.0}}, {"points", {points}}}},
                  {"solver",
                   {{"bounds", {{"m", {r[0], r[1]}}, {"n", {r[2], r[3]}}, {"p", {r[4], r[5]}}}},
                    {"probes", probes},
                    {"tolerance", tolerance},
                    {"threads", scan_threads}}},
                  {"seed", scan_seed},
                  {"output", scan_out}};
      return execute(raw, ".");
    }
  } catch (const qbohm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return 0;
}
