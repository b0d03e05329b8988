#include "qbohm/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qbohm/error.hpp"
#include "qbohm/field_io.hpp"

namespace qbohm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::map<std::string, ScenarioKind> kKinds = {
    {"exponent-scan", ScenarioKind::exponent_scan}, {"eigensolve", ScenarioKind::eigensolve},
    {"dynamics", ScenarioKind::dynamics},           {"trajectories", ScenarioKind::trajectories},
    {"condition-check", ScenarioKind::condition_check}};

const std::set<std::string> kFamilies = {"harmonic", "well", "free", "two-gaussian-slits"};

// Collects problems under dotted paths; never throws on bad input.
class Reader {
 public:
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  void error(const std::string& path, const std::string& what) { errors.push_back(path + " " + what); }

  const json* child(const json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  void unknown_keys(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool found = false;
      for (const char* k : known) found = found || it.key() == k;
      if (!found) warnings.push_back((path.empty() ? "" : path + ".") + it.key() + " is not a recognised key; ignored");
    }
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path) {
    const json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      error(path, "must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      error(path, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<long> integer(const json& obj, const std::string& key, const std::string& path) {
    const json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      error(path, "must be an integer");
      return std::nullopt;
    }
    return v->get<long>();
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path) {
    const json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      error(path, "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& key, const std::string& path) {
    const json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (v->is_number()) return std::vector<double>{v->get<double>()};
    if (!v->is_array()) {
      error(path, "must be a number or an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const json& e : *v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        error(path, "must contain only finite numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }
};

std::optional<Point> point_of(Reader& rd, const json& obj, const std::string& key, const std::string& path, int dim) {
  auto v = rd.numbers(obj, key, path);
  if (!v) return std::nullopt;
  if (static_cast<int>(v->size()) != dim) {
    rd.error(path, "must have one entry per grid axis (" + std::to_string(dim) + ")");
    return std::nullopt;
  }
  Point p{0.0, 0.0};
  for (int d = 0; d < dim; ++d) p[static_cast<std::size_t>(d)] = (*v)[static_cast<std::size_t>(d)];
  return p;
}

std::optional<Grid> read_grid(Reader& rd, const json& g) {
  if (!g.is_object()) {
    rd.error("grid", "must be an object with min, max and points");
    return std::nullopt;
  }
  rd.unknown_keys(g, "grid", {"min", "max", "points"});
  auto lo = rd.numbers(g, "min", "grid.min");
  auto hi = rd.numbers(g, "max", "grid.max");
  const json* pts = rd.child(g, "points");
  if (!lo) rd.error("grid.min", "is required");
  if (!hi) rd.error("grid.max", "is required");
  std::vector<long> points;
  if (!pts) {
    rd.error("grid.points", "is required");
  } else {
    const json arr = pts->is_array() ? *pts : json::array({*pts});
    for (const json& e : arr) {
      if (!e.is_number_integer()) {
        rd.error("grid.points", "must contain integers");
        points.clear();
        break;
      }
      points.push_back(e.get<long>());
    }
  }
  if (!lo || !hi || points.empty()) return std::nullopt;
  const std::size_t dim = points.size();
  if (dim < 1 || dim > 2 || lo->size() != dim || hi->size() != dim) {
    rd.error("grid", "min, max and points must all have 1 or 2 entries, one per axis");
    return std::nullopt;
  }
  bool ok = true;
  std::vector<Axis> axes;
  for (std::size_t d = 0; d < dim; ++d) {
    if (points[d] < 8) {
      rd.error("grid.points", "must be >= 8 on every axis");
      ok = false;
    }
    if (points[d] > 1'000'000) {
      rd.error("grid.points", "is unreasonably large");
      ok = false;
    }
    if (!((*hi)[d] > (*lo)[d])) {
      rd.error("grid.max", "must exceed grid.min on every axis");
      ok = false;
    }
    axes.push_back(Axis{(*lo)[d], (*hi)[d], static_cast<int>(points[d])});
  }
  if (!ok) return std::nullopt;
  return dim == 1 ? Grid(axes[0]) : Grid(axes[0], axes[1]);
}

std::optional<ExponentRange> read_range(Reader& rd, const json& obj, const std::string& key, const std::string& path) {
  const json* v = rd.child(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() || !(*v)[1].is_number_integer()) {
    rd.error(path, "must be an integer pair [lo, hi]");
    return std::nullopt;
  }
  ExponentRange r{(*v)[0].get<int>(), (*v)[1].get<int>()};
  if (r.lo > r.hi) {
    rd.error(path, "must have lo <= hi");
    return std::nullopt;
  }
  return r;
}

bool uses_potential(ScenarioKind k) {
  return k == ScenarioKind::eigensolve || k == ScenarioKind::dynamics || k == ScenarioKind::trajectories;
}

bool uses_time(ScenarioKind k) { return k == ScenarioKind::dynamics || k == ScenarioKind::trajectories; }

}  // namespace

std::string to_string(ScenarioKind kind) {
  for (const auto& [name, k] : kKinds)
    if (k == kind) return name;
  return "unknown";
}

ScenarioKind parse_kind(const std::string& name) {
  auto it = kKinds.find(name);
  if (it == kKinds.end()) throw Error(ErrorKind::config, "unknown scenario kind '" + name + "'");
  return it->second;
}

ValidationResult validate_config(const json& raw, const std::string& base_dir) {
  Reader rd;
  ValidationResult result;
  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  if (!raw.is_object()) {
    result.errors.push_back("config must be a JSON object");
    return result;
  }
  rd.unknown_keys(raw, "", {"schema_version", "kind", "grid", "potential", "initial", "field", "ansatz", "solver",
                            "units", "seed", "output", "checks", "description"});

  if (auto v = rd.integer(raw, "schema_version", "schema_version")) {
    if (*v != 1) rd.error("schema_version", "must be 1");
  } else if (!rd.child(raw, "schema_version")) {
    rd.error("schema_version", "is required");
  }

  bool have_kind = false;
  if (auto k = rd.string(raw, "kind", "kind")) {
    auto it = kKinds.find(*k);
    if (it == kKinds.end()) {
      rd.error("kind", "must be one of exponent-scan, eigensolve, dynamics, trajectories, condition-check");
    } else {
      cfg.kind = it->second;
      have_kind = true;
    }
  } else if (!rd.child(raw, "kind")) {
    rd.error("kind", "is required");
  }

  if (const json* u = rd.child(raw, "units")) {
    rd.unknown_keys(*u, "units", {"hbar", "mass"});
    if (auto h = rd.number(*u, "hbar", "units.hbar")) {
      if (*h <= 0.0) rd.error("units.hbar", "must be positive");
      else cfg.units.hbar = *h;
    }
    if (auto m = rd.number(*u, "mass", "units.mass")) {
      if (*m <= 0.0) rd.error("units.mass", "must be positive");
      else cfg.units.mass = *m;
    }
  }

  bool grid_ok = true;
  if (const json* g = rd.child(raw, "grid")) {
    if (auto grid = read_grid(rd, *g)) cfg.grid = *grid;
    else grid_ok = false;
  } else if (have_kind && cfg.kind != ScenarioKind::exponent_scan) {
    rd.error("grid", "is required");
    grid_ok = false;
  }
  const int dim = cfg.grid.dim();

  if (const json* s = rd.child(raw, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      rd.error("seed", "must be a non-negative integer");
    else
      cfg.seed = s->get<std::uint64_t>();
  } else if (have_kind && (cfg.kind == ScenarioKind::exponent_scan || cfg.kind == ScenarioKind::trajectories)) {
    rd.error("seed", "is required for scenarios that draw random numbers");
  }

  if (auto o = rd.string(raw, "output", "output")) {
    if (o->empty()) rd.error("output", "must not be empty");
    else cfg.output = *o;
  }

  // Ansatz; A defaults to -hbar^2 / 2m.
  cfg.ansatz = AnsatzExponents::bohmian(cfg.units.bohm_coefficient());
  if (const json* a = rd.child(raw, "ansatz")) {
    rd.unknown_keys(*a, "ansatz", {"m", "n", "p", "A"});
    if (auto v = rd.integer(*a, "m", "ansatz.m")) cfg.ansatz.m = static_cast<int>(*v);
    if (auto v = rd.integer(*a, "n", "ansatz.n")) cfg.ansatz.n = static_cast<int>(*v);
    if (auto v = rd.integer(*a, "p", "ansatz.p")) cfg.ansatz.p = static_cast<int>(*v);
    if (auto v = rd.number(*a, "A", "ansatz.A")) cfg.ansatz.A = *v;
    if (cfg.ansatz.A == 0.0 && !cfg.ansatz.is_constant()) rd.error("ansatz.A", "must be nonzero");
  }
  if (have_kind && cfg.kind == ScenarioKind::eigensolve && !cfg.ansatz.is_bohmian() && !cfg.ansatz.is_constant())
    rd.error("ansatz", "must be the Bohmian (-1,0,1) or constant (0,0,0) form for eigensolve");

  // Potential.
  if (const json* p = rd.child(raw, "potential")) {
    rd.unknown_keys(*p, "potential", {"family", "params", "file"});
    if (auto f = rd.string(*p, "family", "potential.family")) {
      if (!kFamilies.count(*f)) rd.error("potential.family", "must be one of harmonic, well, free, two-gaussian-slits");
      else cfg.potential.family = *f;
    }
    if (auto f = rd.string(*p, "file", "potential.file")) cfg.potential.file = *f;
    if (cfg.potential.family.empty() == cfg.potential.file.empty())
      rd.error("potential", "needs exactly one of family or file");
    if (const json* params = rd.child(*p, "params")) {
      if (!params->is_object()) {
        rd.error("potential.params", "must be an object");
      } else {
        for (auto it = params->begin(); it != params->end(); ++it) {
          if (!it->is_number()) rd.error("potential.params." + it.key(), "must be a number");
          else cfg.potential.params[it.key()] = it->get<double>();
        }
      }
    }
  } else if (have_kind && uses_potential(cfg.kind)) {
    rd.error("potential", "is required");
  }
  auto& params = cfg.potential.params;
  const std::string& fam = cfg.potential.family;
  if (fam == "harmonic") {
    params.emplace("omega", 1.0);
    if (params["omega"] <= 0.0) rd.error("potential.params.omega", "must be positive");
  } else if (fam == "two-gaussian-slits") {
    params.emplace("half_separation", 16.0);
    params.emplace("width", 1.0);
    params.emplace("phase", std::numbers::pi);
    params.emplace("beam_width", 20.0);
    if (params["width"] <= 0.0) rd.error("potential.params.width", "must be positive");
    if (params["beam_width"] <= 0.0) rd.error("potential.params.beam_width", "must be positive");
    if (have_kind && cfg.kind != ScenarioKind::trajectories)
      rd.error("potential.family", "two-gaussian-slits is only available for trajectories scenarios");
  }
  for (const auto& [key, value] : params) {
    static const std::map<std::string, std::set<std::string>> known = {
        {"harmonic", {"omega"}},
        {"two-gaussian-slits", {"half_separation", "width", "phase", "beam_width"}},
        {"well", {}},
        {"free", {}}};
    auto it = known.find(fam);
    if (it != known.end() && !it->second.count(key))
      rd.warnings.push_back("potential.params." + key + " is not used by family " + fam);
  }
  if (!cfg.potential.file.empty() && grid_ok) {
    namespace fs = std::filesystem;
    const fs::path path = fs::path(base_dir) / cfg.potential.file;
    try {
      const ScalarField v = load_field_csv(path.string(), Quantity::energy);
      if (!(v.grid() == cfg.grid)) rd.error("potential.file", "grid header does not match the config grid");
    } catch (const Error& e) {
      rd.error("potential.file", std::string("could not be loaded: ") + e.what());
    }
  }

  // Initial state.
  if (const json* in = rd.child(raw, "initial")) {
    rd.unknown_keys(*in, "initial", {"family", "center", "sigma", "momentum"});
    if (auto f = rd.string(*in, "family", "initial.family")) {
      if (*f != "gaussian" && *f != "ground") rd.error("initial.family", "must be gaussian or ground");
      else cfg.initial.family = *f;
    }
    if (auto p = point_of(rd, *in, "center", "initial.center", dim)) cfg.initial.center = *p;
    if (auto p = point_of(rd, *in, "sigma", "initial.sigma", dim)) {
      cfg.initial.sigma = *p;
      for (int d = 0; d < dim; ++d)
        if ((*p)[static_cast<std::size_t>(d)] <= 0.0) rd.error("initial.sigma", "must be positive");
    }
    if (auto p = point_of(rd, *in, "momentum", "initial.momentum", dim)) cfg.initial.momentum = *p;
  }
  if (fam == "two-gaussian-slits") cfg.initial.family = "two-gaussian-slits";
  if (have_kind && cfg.kind == ScenarioKind::dynamics && cfg.initial.family != "gaussian")
    rd.error("initial.family", "must be gaussian for dynamics: the polar integrator needs a node-free state");

  // Condition-check field.
  if (const json* f = rd.child(raw, "field")) {
    rd.unknown_keys(*f, "field", {"bumps", "file"});
    if (auto file = rd.string(*f, "file", "field.file")) cfg.field.file = *file;
    if (const json* bumps = rd.child(*f, "bumps")) {
      if (!bumps->is_array()) {
        rd.error("field.bumps", "must be an array");
      } else {
        for (std::size_t i = 0; i < bumps->size(); ++i) {
          const std::string path = "field.bumps[" + std::to_string(i) + "]";
          const json& b = (*bumps)[i];
          GaussianBump bump;
          if (auto a = rd.number(b, "amplitude", path + ".amplitude")) bump.amplitude = *a;
          if (auto c = point_of(rd, b, "center", path + ".center", dim)) bump.center = *c;
          if (auto w = point_of(rd, b, "width", path + ".width", dim)) bump.width = *w;
          for (int d = 0; d < dim; ++d)
            if (bump.width[static_cast<std::size_t>(d)] <= 0.0) rd.error(path + ".width", "must be positive");
          cfg.field.bumps.push_back(bump);
        }
      }
    }
    if (cfg.field.bumps.empty() == cfg.field.file.empty()) rd.error("field", "needs exactly one of bumps or file");
  } else if (have_kind && cfg.kind == ScenarioKind::condition_check) {
    rd.error("field", "is required");
  }

  // Solver.
  SolverSpec& sv = cfg.solver;
  if (have_kind && uses_time(cfg.kind)) {
    double h = cfg.grid.spacing(0);
    if (dim == 2) h = std::min(h, cfg.grid.spacing(1));
    sv.dt = cfg.kind == ScenarioKind::dynamics ? 0.2 * h * h * cfg.units.mass / cfg.units.hbar : 0.01;
  }
  sv.histogram_axis = dim - 1;
  if (const json* s = rd.child(raw, "solver")) {
    rd.unknown_keys(*s, "solver", {"tol_grad", "max_iterations", "step", "oracle_states", "bounds", "probes",
                                   "tolerance", "dt", "oracle_dt", "t_end", "snapshots", "paths", "bins",
                                   "histogram_axis", "record_every", "threads"});
    if (auto v = rd.number(*s, "tol_grad", "solver.tol_grad")) {
      if (*v <= 0.0) rd.error("solver.tol_grad", "must be positive");
      sv.tol_grad = *v;
    }
    if (auto v = rd.integer(*s, "max_iterations", "solver.max_iterations")) {
      if (*v < 1) rd.error("solver.max_iterations", "must be >= 1");
      sv.max_iterations = *v;
    }
    if (auto v = rd.number(*s, "step", "solver.step")) {
      if (*v <= 0.0) rd.error("solver.step", "must be positive");
      sv.step = *v;
    }
    if (auto v = rd.integer(*s, "oracle_states", "solver.oracle_states")) {
      if (*v < 1) rd.error("solver.oracle_states", "must be >= 1");
      sv.oracle_states = static_cast<int>(*v);
    }
    if (const json* b = rd.child(*s, "bounds")) {
      rd.unknown_keys(*b, "solver.bounds", {"m", "n", "p"});
      if (auto r = read_range(rd, *b, "m", "solver.bounds.m")) sv.bounds.m = *r;
      if (auto r = read_range(rd, *b, "n", "solver.bounds.n")) sv.bounds.n = *r;
      if (auto r = read_range(rd, *b, "p", "solver.bounds.p")) sv.bounds.p = *r;
    }
    if (auto v = rd.integer(*s, "probes", "solver.probes")) sv.probes = static_cast<int>(*v);
    if (auto v = rd.number(*s, "tolerance", "solver.tolerance")) {
      if (*v <= 0.0) rd.error("solver.tolerance", "must be positive");
      sv.tolerance = *v;
    }
    if (auto v = rd.number(*s, "dt", "solver.dt")) {
      if (*v <= 0.0) rd.error("solver.dt", "must be positive");
      sv.dt = *v;
    }
    if (auto v = rd.number(*s, "oracle_dt", "solver.oracle_dt")) {
      if (*v <= 0.0) rd.error("solver.oracle_dt", "must be positive");
      sv.oracle_dt = *v;
    }
    if (auto v = rd.number(*s, "t_end", "solver.t_end")) {
      if (*v <= 0.0) rd.error("solver.t_end", "must be positive");
      sv.t_end = *v;
    }
    if (auto v = rd.numbers(*s, "snapshots", "solver.snapshots")) sv.snapshots = *v;
    if (auto v = rd.integer(*s, "paths", "solver.paths")) {
      if (*v < 1) rd.error("solver.paths", "must be >= 1");
      sv.paths = static_cast<int>(*v);
    }
    if (auto v = rd.integer(*s, "bins", "solver.bins")) {
      if (*v < 1) rd.error("solver.bins", "must be >= 1");
      sv.bins = static_cast<int>(*v);
    }
    if (auto v = rd.integer(*s, "histogram_axis", "solver.histogram_axis")) {
      if (*v < 0 || *v >= dim) rd.error("solver.histogram_axis", "must name a grid axis");
      sv.histogram_axis = static_cast<int>(*v);
    }
    if (auto v = rd.integer(*s, "record_every", "solver.record_every")) {
      if (*v < 1) rd.error("solver.record_every", "must be >= 1");
      sv.record_every = static_cast<int>(*v);
    }
    if (auto v = rd.integer(*s, "threads", "solver.threads")) {
      if (*v < 0) rd.error("solver.threads", "must be >= 0");
      sv.threads = static_cast<int>(*v);
    }
  }
  if (sv.oracle_dt == 0.0) sv.oracle_dt = sv.dt;
  const json* solver_json = rd.child(raw, "solver");
  if (have_kind && cfg.kind == ScenarioKind::trajectories && sv.dt > 0.0 &&
      !(solver_json && rd.child(*solver_json, "record_every"))) {
    // About a hundred samples per path unless asked otherwise.
    const double steps = std::ceil(sv.t_end / sv.dt - 1e-9);
    sv.record_every = std::max(1, static_cast<int>(std::ceil(steps / 100.0)));
  }
  if (sv.snapshots.empty()) sv.snapshots = {sv.t_end};
  for (double t : sv.snapshots)
    if (t < 0.0 || t > sv.t_end) rd.error("solver.snapshots", "must lie in [0, t_end]");
  std::sort(sv.snapshots.begin(), sv.snapshots.end());
  if (have_kind && cfg.kind == ScenarioKind::exponent_scan) {
    if (sv.probes < 3) rd.error("solver.probes", "must be >= 3");
    if (!sv.bounds.exhaustive())
      rd.warnings.push_back("solver.bounds narrower than [-2,2]^3: the scan is not exhaustive");
    if (dim != 1) rd.error("grid", "exponent scans run on a 1D grid");
  }
  if (have_kind && cfg.kind == ScenarioKind::dynamics) {
    double h = cfg.grid.spacing(0);
    if (dim == 2) h = std::min(h, cfg.grid.spacing(1));
    const double limit = 0.2 * h * h * cfg.units.mass / cfg.units.hbar;
    if (sv.dt > limit * (1.0 + 1e-12))
      rd.error("solver.dt", "exceeds the polar stability bound 0.2 h^2 m / hbar = " + format_double(limit));
  }

  // Checks.
  CheckSpec& ck = cfg.checks;
  for (const std::array<int, 3> e : {std::array<int, 3>{0, 0, 0}, std::array<int, 3>{-1, 0, 1}}) {
    const ScanBounds& b = sv.bounds;
    if (e[0] >= b.m.lo && e[0] <= b.m.hi && e[1] >= b.n.lo && e[1] <= b.n.hi && e[2] >= b.p.lo && e[2] <= b.p.hi)
      ck.expected_solutions.push_back(e);
  }
  if (const json* c = rd.child(raw, "checks")) {
    rd.unknown_keys(*c, "checks", {"expected_solutions", "min_separation", "oracle_tolerance", "expected_lambda",
                                   "lambda_tolerance", "hj_tolerance", "max_residual", "min_residual",
                                   "max_drift_rate", "agreement", "width_tolerance", "min_p_value",
                                   "max_minimum_paths"});
    if (const json* e = rd.child(*c, "expected_solutions")) {
      ck.expected_solutions.clear();
      bool ok = e->is_array();
      if (ok) {
        for (const json& t : *e) {
          if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
              !t[2].is_number_integer()) {
            ok = false;
            break;
          }
          ck.expected_solutions.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
        }
      }
      if (!ok) rd.error("checks.expected_solutions", "must be a list of integer triples");
      std::sort(ck.expected_solutions.begin(), ck.expected_solutions.end());
    }
    auto positive = [&](const char* key, double& slot) {
      if (auto v = rd.number(*c, key, std::string("checks.") + key)) {
        if (*v < 0.0) rd.error(std::string("checks.") + key, "must be non-negative");
        slot = *v;
      }
    };
    positive("min_separation", ck.min_separation);
    positive("oracle_tolerance", ck.oracle_tolerance);
    positive("lambda_tolerance", ck.lambda_tolerance);
    positive("hj_tolerance", ck.hj_tolerance);
    positive("max_drift_rate", ck.max_drift_rate);
    positive("agreement", ck.agreement);
    positive("width_tolerance", ck.width_tolerance);
    positive("min_p_value", ck.min_p_value);
    positive("max_minimum_paths", ck.max_minimum_paths);
    if (auto v = rd.number(*c, "expected_lambda", "checks.expected_lambda")) ck.expected_lambda = *v;
    if (auto v = rd.number(*c, "max_residual", "checks.max_residual")) ck.max_residual = *v;
    if (auto v = rd.number(*c, "min_residual", "checks.min_residual")) ck.min_residual = *v;
  }
  std::sort(ck.expected_solutions.begin(), ck.expected_solutions.end());

  result.errors = std::move(rd.errors);
  result.warnings = std::move(rd.warnings);
  if (result.ok()) {
    result.effective = effective_json(cfg);
    result.config = std::move(cfg);
  }
  return result;
}

ValidationResult validate_config_text(const std::string& text, const std::string& base_dir) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    ValidationResult r;
    r.errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return r;
  }
  return validate_config(raw, base_dir);
}

ValidationResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ValidationResult r;
    r.errors.push_back("cannot read config file " + path);
    return r;
  }
  std::ostringstream text;
  text << in.rdbuf();
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  return validate_config_text(text.str(), dir.empty() ? "." : dir.string());
}

namespace {

ordered_json point_json(const Point& p, int dim) {
  ordered_json a = ordered_json::array();
  for (int d = 0; d < dim; ++d) a.push_back(p[static_cast<std::size_t>(d)]);
  return a;
}

}  // namespace

ordered_json effective_json(const ScenarioConfig& c) {
  const int dim = c.grid.dim();
  ordered_json j;
  j["schema_version"] = c.schema_version;
  j["kind"] = to_string(c.kind);
  ordered_json g;
  for (int d = 0; d < dim; ++d) {
    g["min"].push_back(c.grid.axis(d).min);
    g["max"].push_back(c.grid.axis(d).max);
    g["points"].push_back(c.grid.points(d));
  }
  j["grid"] = g;
  if (uses_potential(c.kind)) {
    ordered_json p;
    if (!c.potential.family.empty()) p["family"] = c.potential.family;
    if (!c.potential.file.empty()) p["file"] = c.potential.file;
    p["params"] = ordered_json::object();
    for (const auto& [k, v] : c.potential.params) p["params"][k] = v;
    j["potential"] = p;
  }
  if (uses_time(c.kind)) {
    ordered_json in;
    in["family"] = c.initial.family;
    if (c.initial.family == "gaussian") {
      in["center"] = point_json(c.initial.center, dim);
      in["sigma"] = point_json(c.initial.sigma, dim);
      in["momentum"] = point_json(c.initial.momentum, dim);
    }
    j["initial"] = in;
  }
  if (c.kind == ScenarioKind::condition_check) {
    ordered_json f;
    if (!c.field.file.empty()) f["file"] = c.field.file;
    for (const GaussianBump& b : c.field.bumps)
      f["bumps"].push_back({{"amplitude", b.amplitude}, {"center", point_json(b.center, dim)},
                            {"width", point_json(b.width, dim)}});
    j["field"] = f;
  }
  if (c.kind == ScenarioKind::eigensolve || c.kind == ScenarioKind::condition_check)
    j["ansatz"] = {{"m", c.ansatz.m}, {"n", c.ansatz.n}, {"p", c.ansatz.p}, {"A", c.ansatz.A}};
  else if (c.kind == ScenarioKind::exponent_scan)
    j["ansatz"] = {{"A", c.ansatz.A}};

  const SolverSpec& s = c.solver;
  ordered_json sv;
  switch (c.kind) {
    case ScenarioKind::eigensolve:
      sv["tol_grad"] = s.tol_grad;
      sv["max_iterations"] = s.max_iterations;
      if (s.step) sv["step"] = *s.step;
      sv["oracle_states"] = s.oracle_states;
      break;
    case ScenarioKind::exponent_scan:
      sv["bounds"] = {{"m", {s.bounds.m.lo, s.bounds.m.hi}},
                      {"n", {s.bounds.n.lo, s.bounds.n.hi}},
                      {"p", {s.bounds.p.lo, s.bounds.p.hi}}};
      sv["probes"] = s.probes;
      sv["tolerance"] = s.tolerance;
      break;
    case ScenarioKind::dynamics:
    case ScenarioKind::trajectories:
      sv["dt"] = s.dt;
      sv["oracle_dt"] = s.oracle_dt;
      sv["t_end"] = s.t_end;
      sv["snapshots"] = s.snapshots;
      if (c.kind == ScenarioKind::trajectories) {
        sv["paths"] = s.paths;
        sv["bins"] = s.bins;
        sv["histogram_axis"] = s.histogram_axis;
        sv["record_every"] = s.record_every;
      }
      break;
    case ScenarioKind::condition_check:
      break;
  }
  sv["threads"] = s.threads;
  j["solver"] = sv;
  j["units"] = {{"hbar", c.units.hbar}, {"mass", c.units.mass}};
  if (c.seed) j["seed"] = *c.seed;
  j["output"] = c.output;

  const CheckSpec& k = c.checks;
  ordered_json ck = ordered_json::object();
  switch (c.kind) {
    case ScenarioKind::exponent_scan:
      ck["expected_solutions"] = ordered_json::array();
      for (const auto& e : k.expected_solutions) ck["expected_solutions"].push_back(e);
      ck["min_separation"] = k.min_separation;
      break;
    case ScenarioKind::eigensolve:
      ck["oracle_tolerance"] = k.oracle_tolerance;
      if (k.expected_lambda) {
        ck["expected_lambda"] = *k.expected_lambda;
        ck["lambda_tolerance"] = k.lambda_tolerance;
      }
      ck["hj_tolerance"] = k.hj_tolerance;
      break;
    case ScenarioKind::condition_check:
      if (k.max_residual) ck["max_residual"] = *k.max_residual;
      if (k.min_residual) ck["min_residual"] = *k.min_residual;
      break;
    case ScenarioKind::dynamics:
      ck["max_drift_rate"] = k.max_drift_rate;
      ck["agreement"] = k.agreement;
      ck["width_tolerance"] = k.width_tolerance;
      break;
    case ScenarioKind::trajectories:
      ck["min_p_value"] = k.min_p_value;
      ck["max_minimum_paths"] = k.max_minimum_paths;
      break;
  }
  j["checks"] = ck;
  return j;
}

}  // namespace qbohm
