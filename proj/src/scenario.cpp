#include "qbohm/scenario.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "qbohm/dynamics.hpp"
#include "qbohm/eigensolve.hpp"
#include "qbohm/elvariation.hpp"
#include "qbohm/error.hpp"
#include "qbohm/field_io.hpp"
#include "qbohm/field_ops.hpp"
#include "qbohm/stats.hpp"
#include "qbohm/trajectories.hpp"

namespace qbohm {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(ErrorKind::io, "SHA-256 initialisation failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::io, "cannot write " + path.string());
    fill(os);
    os.flush();
    if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
    names_.push_back(name);
  }
  void json(const std::string& name, const ordered_json& j) {
    write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }
  void field(const std::string& name, const ScalarField& f) {
    write(name, [&](std::ostream& os) { write_field_csv(os, f); });
  }

  std::vector<OutputFile> inventory() const {
    std::vector<OutputFile> out;
    for (const std::string& n : names_) {
      const fs::path p = dir_ / n;
      out.push_back({n, sha256_file(p.string()), fs::file_size(p)});
    }
    return out;
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

struct Context {
  const ScenarioConfig& cfg;
  OutputDir& out;
  RunSummary& summary;
  std::string stage;

  void check(const std::string& name, double measured, double tolerance, const std::string& cmp = "<=") {
    const bool ok = cmp == "<=" ? measured <= tolerance : measured >= tolerance;
    summary.checks.push_back({name, ok && std::isfinite(measured), measured, tolerance, cmp});
  }
};

ScalarField build_potential(const ScenarioConfig& c) {
  if (!c.potential.file.empty())
    return load_field_csv((fs::path(c.base_dir) / c.potential.file).string(), Quantity::energy);
  if (c.potential.family == "harmonic") {
    const double w = c.potential.params.at("omega");
    const double k = 0.5 * c.units.mass * w * w;
    const int dim = c.grid.dim();
    return ScalarField::from_function(
        c.grid, [&](const Point& x) { return k * (x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0)); }, Quantity::energy);
  }
  return ScalarField::constant(c.grid, 0.0, Quantity::energy);
}

ComplexFieldState two_slit_state(const ScenarioConfig& c) {
  const auto& p = c.potential.params;
  const double d = p.at("half_separation"), w = p.at("width"), phase = p.at("phase"), bw = p.at("beam_width");
  const Grid& g = c.grid;
  const std::size_t ay = static_cast<std::size_t>(g.dim() - 1);
  const std::complex<double> rel = std::polar(1.0, phase);
  std::vector<std::complex<double>> psi(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.position(k);
    const double y = x[ay];
    double beam = 1.0;
    if (g.dim() == 2) beam = std::exp(-x[0] * x[0] / (4.0 * bw * bw));
    psi[k] = beam * (std::exp(-(y - d) * (y - d) / (4.0 * w * w)) + rel * std::exp(-(y + d) * (y + d) / (4.0 * w * w)));
  }
  ComplexFieldState st = ComplexFieldState::from_values(g, psi, 0.0);
  const double f = 1.0 / std::sqrt(st.norm());
  return {f * st.re, f * st.im, 0.0};
}

ComplexFieldState initial_wave(const ScenarioConfig& c, const ScalarField& v) {
  const InitialSpec& in = c.initial;
  if (in.family == "two-gaussian-slits") return two_slit_state(c);
  if (in.family == "ground") {
    const OracleSpectrum spec = schrodinger_oracle(v, 1, c.units);
    return {spec.eigenvectors[0], ScalarField::constant(c.grid, 0.0), 0.0};
  }
  return gaussian_packet(c.grid, in.center, in.sigma, in.momentum, c.units);
}

ordered_json breakdown_json(const EnergyBreakdown& b) {
  return {{"flow", b.flow}, {"external", b.external}, {"quantum", b.quantum}, {"total", b.total()}};
}

ordered_json triple_list(const std::vector<std::array<int, 3>>& v) {
  ordered_json a = ordered_json::array();
  for (const auto& e : v) a.push_back(e);
  return a;
}

// ---------------------------------------------------------------------------

void run_exponent_scan(Context& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  ScanOptions opts;
  opts.probes = c.solver.probes;
  opts.seed = *c.seed;
  opts.tolerance = c.solver.tolerance;
  opts.coefficient = c.ansatz.A;
  opts.grid = c.grid;
  opts.threads = c.solver.threads;
  ctx.stage = "scan";
  const ScanReport rep = exponent_scan(c.solver.bounds, opts);

  ctx.stage = "write";
  ctx.out.write("scan.csv", [&](std::ostream& os) {
    os << "m,n,p,max_normalized_residual,classified\n";
    for (const CandidateResult& cr : rep.candidates)
      os << cr.exponents.m << ',' << cr.exponents.n << ',' << cr.exponents.p << ','
         << format_double(cr.max_residual) << ',' << (cr.solution ? "solution" : "rejected") << '\n';
  });
  ordered_json j;
  j["bounds"] = {{"m", {rep.bounds.m.lo, rep.bounds.m.hi}},
                 {"n", {rep.bounds.n.lo, rep.bounds.n.hi}},
                 {"p", {rep.bounds.p.lo, rep.bounds.p.hi}}};
  j["exhaustive"] = rep.exhaustive;
  j["seed"] = rep.seed;
  j["tolerance"] = rep.tolerance;
  j["grid"] = grid_header(rep.grid);
  j["solutions"] = triple_list(rep.solutions);
  j["min_nonsolution_residual"] = rep.min_nonsolution_residual();
  ordered_json near = ordered_json::array();
  for (const CandidateResult& cr : rep.candidates) {
    if (!cr.near_threshold) continue;
    ordered_json e{{"exponents", cr.exponents.exponents()}, {"residual", cr.max_residual}};
    if (cr.refined_residual) e["refined_residual"] = *cr.refined_residual;
    if (cr.observed_order) e["observed_order"] = *cr.observed_order;
    e["solution"] = cr.solution;
    near.push_back(e);
  }
  j["near_threshold"] = near;
  ordered_json probes = ordered_json::array();
  for (const ProbeDescriptor& p : rep.probes) {
    ordered_json bumps = ordered_json::array();
    for (const GaussianBump& b : p.bumps)
      bumps.push_back({{"amplitude", b.amplitude}, {"center", b.center[0]}, {"width", b.width[0]}});
    probes.push_back({{"seed", p.seed}, {"attempt", p.attempt}, {"bumps", bumps}});
  }
  j["probes"] = probes;
  ctx.out.json("scan.json", j);

  ctx.summary.results = {{"solutions", triple_list(rep.solutions)},
                         {"min_nonsolution_residual", rep.min_nonsolution_residual()},
                         {"exhaustive", rep.exhaustive}};
  std::vector<std::array<int, 3>> found = rep.solutions;
  std::sort(found.begin(), found.end());
  std::vector<std::array<int, 3>> diff;
  std::set_symmetric_difference(found.begin(), found.end(), c.checks.expected_solutions.begin(),
                                c.checks.expected_solutions.end(), std::back_inserter(diff));
  ctx.check("solution_set_mismatches", static_cast<double>(diff.size()), 0.0);
  if (rep.candidates.size() > rep.solutions.size())
    ctx.check("min_nonsolution_residual", rep.min_nonsolution_residual(), c.checks.min_separation, ">=");
}

void run_eigensolve(Context& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  ctx.stage = "potential";
  const ScalarField v = build_potential(c);
  SolverOptions so;
  so.tol_grad = c.solver.tol_grad;
  so.max_iterations = c.solver.max_iterations;
  so.step = c.solver.step;
  ctx.stage = "minimize";
  const EnergyReport rep = minimize_energy(v, c.ansatz, c.units, so);
  ctx.stage = "oracle";
  const OracleSpectrum spec = schrodinger_oracle(v, c.solver.oracle_states, c.units);
  const double e0 = spec.eigenvalues.front();

  ctx.stage = "write";
  ctx.out.field("r_opt.csv", rep.r_opt);
  ctx.out.field("oracle_ground.csv", spec.eigenvectors.front());
  ordered_json j;
  j["lambda"] = rep.lambda;
  j["breakdown"] = breakdown_json(rep.breakdown);
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["gradient_norm"] = rep.gradient_norm;
  j["step"] = rep.step;
  j["step_halvings"] = rep.step_halvings;
  j["oracle_eigenvalues"] = spec.eigenvalues;
  j["oracle_difference"] = rep.lambda - e0;

  ctx.check("gradient_norm", rep.gradient_norm, c.solver.tol_grad);
  if (c.ansatz.is_bohmian()) {
    ctx.check("oracle_agreement", std::abs(rep.lambda - e0) / std::max(1.0, std::abs(e0)), c.checks.oracle_tolerance);
    ctx.stage = "hj-residual";
    const ResidualField hj =
        hj_residual(rep.r_opt, ScalarField::constant(c.grid, 0.0, Quantity::action), v, rep.lambda, c.ansatz, c.units);
    ctx.out.write("hj_residual.csv", [&](std::ostream& os) { write_masked_csv(os, hj.values, hj.valid); });
    j["hj_residual"] = {{"sup_interior", hj.sup_interior}, {"sup_weighted", hj.sup_weighted}};
    ctx.check("hj_residual_weighted_sup", hj.sup_weighted, c.checks.hj_tolerance);
  } else {
    ctx.check("classical_limit_bound", rep.lambda - (c.ansatz.A + v.min()), c.checks.lambda_tolerance);
  }
  if (c.checks.expected_lambda)
    ctx.check("lambda_vs_expected", std::abs(rep.lambda - *c.checks.expected_lambda), c.checks.lambda_tolerance);
  ctx.out.json("energy.json", j);
  ctx.summary.results = {{"lambda", rep.lambda}, {"oracle_ground", e0}, {"iterations", rep.iterations},
                         {"converged", rep.converged}};
}

void run_condition_check(Context& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  ctx.stage = "field";
  const ScalarField r = c.field.file.empty()
                            ? gaussian_mixture(c.grid, c.field.bumps)
                            : load_field_csv((fs::path(c.base_dir) / c.field.file).string());
  require_same_grid(c.grid, r.grid(), "condition-check field");
  ctx.stage = "residual";
  const ConditionResidual res = condition_residual(r, c.ansatz);
  ctx.stage = "write";
  ctx.out.write("residual.csv", [&](std::ostream& os) { write_masked_csv(os, res.residual, res.valid); });
  ordered_json j{{"ansatz", c.ansatz.label()},         {"normalized_sup", res.normalized_sup},
                 {"normalized_l2", res.normalized_l2}, {"norm_sup", res.norm_sup},
                 {"norm_l2", res.norm_l2},             {"term_scale", res.term_scale},
                 {"valid_fraction", res.valid_fraction}};
  ctx.out.json("condition.json", j);
  ctx.summary.results = j;
  if (c.checks.max_residual) ctx.check("normalized_sup_max", res.normalized_sup, *c.checks.max_residual);
  if (c.checks.min_residual) ctx.check("normalized_sup_min", res.normalized_sup, *c.checks.min_residual, ">=");
}

// Central 80% of every axis.
bool central(const Grid& g, std::size_t k) {
  const Point x = g.position(k);
  for (int d = 0; d < g.dim(); ++d) {
    const Axis& a = g.axis(d);
    const double mid = 0.5 * (a.min + a.max);
    if (std::abs(x[static_cast<std::size_t>(d)] - mid) > 0.4 * a.length()) return false;
  }
  return true;
}

double second_moment_width(const ScalarField& rho, int axis) {
  const Grid& g = rho.grid();
  const double mass = integrate(rho);
  const ScalarField xr = ScalarField::from_function(g, [&](const Point& x) { return x[static_cast<std::size_t>(axis)]; });
  const double mean = integrate(xr * rho) / mass;
  const ScalarField dev = ScalarField::from_function(g, [&](const Point& x) {
    const double z = x[static_cast<std::size_t>(axis)] - mean;
    return z * z;
  });
  return std::sqrt(integrate(dev * rho) / mass);
}

std::string snapshot_name(const char* stem, std::size_t i) { return std::string(stem) + "_" + std::to_string(i) + ".csv"; }

void run_dynamics(Context& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const SolverSpec& sv = c.solver;
  const Grid& g = c.grid;
  ctx.stage = "potential";
  const ScalarField v = build_potential(c);
  const InitialSpec& in = c.initial;

  ctx.stage = "polar";
  const long steps = std::max(1L, static_cast<long>(std::ceil(sv.t_end / sv.dt - 1e-9)));
  const double dt = sv.t_end / static_cast<double>(steps);
  auto snap_index = [&](double t, double h) { return std::lround(t / h); };
  PolarState st = gaussian_polar(g, in.center, in.sigma, in.momentum);
  double drift_sum = 0.0, drift_max = 0.0;
  long renormalizations = 0;
  ordered_json snaps = ordered_json::array();
  std::size_t next = 0;
  auto emit_polar = [&](long k) {
    while (next < sv.snapshots.size() && snap_index(sv.snapshots[next], dt) == k) {
      ctx.out.field(snapshot_name("polar_R", next), st.r);
      ctx.out.field(snapshot_name("polar_S", next), st.s);
      snaps.push_back({{"index", next}, {"t", st.t}, {"polar_norm", integrate(square(st.r))}});
      ++next;
    }
  };
  emit_polar(0);
  for (long k = 1; k <= steps; ++k) {
    PolarStep ps = step_polar(st, v, dt, c.units);
    drift_sum += std::abs(ps.norm_drift);
    drift_max = std::max(drift_max, std::abs(ps.norm_drift));
    renormalizations += ps.renormalized ? 1 : 0;
    st = std::move(ps.state);
    st.t = static_cast<double>(k) * dt;
    emit_polar(k);
  }

  ctx.stage = "oracle";
  const long osteps = std::max(1L, std::lround(sv.t_end / sv.oracle_dt));
  const double odt = sv.t_end / static_cast<double>(osteps);
  const CrankNicolson cn(v, odt, c.units);
  ComplexFieldState psi = gaussian_packet(g, in.center, in.sigma, in.momentum, c.units);
  next = 0;
  auto emit_oracle = [&](long k) {
    while (next < sv.snapshots.size() && snap_index(sv.snapshots[next], odt) == k) {
      ctx.out.field(snapshot_name("oracle_density", next), psi.density());
      snaps[next]["oracle_norm"] = psi.norm();
      ++next;
    }
  };
  emit_oracle(0);
  for (long k = 1; k <= osteps; ++k) {
    psi = cn.step(psi);
    psi.t = static_cast<double>(k) * odt;
    emit_oracle(k);
  }

  ctx.stage = "compare";
  const PolarDecomposition dec = polar_decompose(psi, c.units);
  const VectorField go = phase_gradient(psi, c.units);
  const VectorField gp = gradient(st.s);
  double dr = 0.0, rmax = 0.0, dgs = 0.0, gsmax = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!central(g, k)) continue;
    dr = std::max(dr, std::abs(st.r[k] - dec.state.r[k]));
    rmax = std::max(rmax, dec.state.r[k]);
    double diff2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) diff2 += (gp[d][k] - go[d][k]) * (gp[d][k] - go[d][k]);
    dgs = std::max(dgs, std::sqrt(diff2));
    gsmax = std::max(gsmax, std::sqrt(go.norm_squared(k)));
  }
  const double r_rel = dr / rmax;
  const double s_rel = gsmax > 0.0 ? dgs / gsmax : dgs;

  ordered_json j;
  j["dt"] = dt;
  j["steps"] = steps;
  j["oracle_dt"] = odt;
  j["oracle_steps"] = osteps;
  j["snapshots"] = snaps;
  j["norm_drift_total"] = drift_sum;
  j["norm_drift_rate"] = drift_sum / sv.t_end;
  j["norm_drift_max_step"] = drift_max;
  j["renormalizations"] = renormalizations;
  j["oracle_norm_error"] = std::abs(psi.norm() - 1.0);
  j["r_difference_relative"] = r_rel;
  j["grad_s_difference_relative"] = s_rel;
  ctx.check("norm_drift_rate", drift_sum / sv.t_end, c.checks.max_drift_rate);
  ctx.check("r_agreement", r_rel, c.checks.agreement);
  ctx.check("grad_s_agreement", s_rel, c.checks.agreement);
  if (c.potential.family == "free") {
    ordered_json widths = ordered_json::array();
    double worst = 0.0;
    const ScalarField rho = square(st.r);
    for (int d = 0; d < g.dim(); ++d) {
      const double s0 = in.sigma[static_cast<std::size_t>(d)];
      const double tau = c.units.hbar * sv.t_end / (2.0 * c.units.mass * s0 * s0);
      const double expect = s0 * std::sqrt(1.0 + tau * tau);
      const double got = second_moment_width(rho, d);
      widths.push_back({{"fitted", got}, {"analytic", expect}});
      worst = std::max(worst, std::abs(got / expect - 1.0));
    }
    j["widths"] = widths;
    ctx.check("width_relative_error", worst, c.checks.width_tolerance);
  }
  ctx.out.json("dynamics.json", j);
  ctx.summary.results = {{"r_difference_relative", r_rel},
                         {"grad_s_difference_relative", s_rel},
                         {"norm_drift_rate", drift_sum / sv.t_end}};
}

void run_trajectories(Context& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const SolverSpec& sv = c.solver;
  const Grid& g = c.grid;
  ctx.stage = "potential";
  const ScalarField v = build_potential(c);
  ctx.stage = "initial-state";
  const ComplexFieldState psi0 = initial_wave(c, v);
  ctx.stage = "seeds";
  Rng rng(*c.seed);
  const std::vector<Point> seeds = sample_density(psi0.density(), static_cast<std::size_t>(sv.paths), rng);

  ctx.stage = "integrate";
  TrajectoryOptions topts;
  topts.record_every = sv.record_every;
  topts.threads = sv.threads;
  TrajectoryBundle bundle{g, {}, {}, {}, 0.0, 1};
  ScalarField final_density = psi0.density();
  long oracle_steps = 0;
  if (c.initial.family == "ground") {
    // Stationary state: S = -lambda t is uniform in space, so grad S = 0.
    SnapshotProvider prov = SnapshotProvider::stationary(gradient(ScalarField::constant(g, 0.0, Quantity::action)));
    bundle = integrate_trajectories(prov, seeds, 0.0, sv.t_end, sv.dt, c.units, topts);
  } else {
    const long osteps = std::max(1L, std::lround(sv.t_end / sv.oracle_dt));
    OracleProvider prov(psi0, v, sv.t_end / static_cast<double>(osteps), c.units);
    bundle = integrate_trajectories(prov, seeds, 0.0, sv.t_end, sv.dt, c.units, topts);
    prov.prepare(sv.t_end, sv.t_end);
    final_density = prov.state().density();
    oracle_steps = prov.steps_taken();
  }

  ctx.stage = "histogram";
  const Histogram hist = endpoint_histogram(bundle, sv.bins, sv.histogram_axis);
  const std::vector<double> expected = bin_probabilities(final_density, hist);
  std::vector<double> observed(hist.counts.begin(), hist.counts.end());
  const ChiSquareResult chi = chi_square_test(observed, expected);

  ctx.stage = "write";
  ctx.out.write("trajectories.csv", [&](std::ostream& os) { write_bundle_csv(os, bundle); });
  ctx.out.write("histogram.csv", [&](std::ostream& os) { write_histogram_csv(os, hist); });
  ctx.out.write("histogram_expected.csv", [&](std::ostream& os) {
    os << "center,probability\n";
    for (std::size_t b = 0; b < expected.size(); ++b)
      os << format_double(hist.centers[b]) << ',' << format_double(expected[b]) << '\n';
  });
  ctx.out.field("final_density.csv", final_density);

  ordered_json j;
  j["seed"] = *c.seed;
  j["paths"] = bundle.paths.size();
  j["completed"] = bundle.completed();
  j["exited"] = bundle.paths.size() - bundle.completed();
  j["dt"] = bundle.dt;
  j["oracle_steps"] = oracle_steps;
  j["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.degrees_of_freedom}, {"cells", chi.cells},
                     {"p_value", chi.p_value}};
  ctx.check("equivariance_p_value", chi.p_value, c.checks.min_p_value, ">=");
  if (g.dim() == 1) {
    const long violations = crossing_violations(bundle);
    j["crossing_violations"] = violations;
    ctx.check("crossing_violations", static_cast<double>(violations), 0.0);
  }
  if (c.initial.family == "two-gaussian-slits") {
    const std::vector<std::size_t> mins = deepest_minima(expected, 3);
    ordered_json mj = ordered_json::array();
    long in_minima = 0;
    for (std::size_t b : mins) {
      mj.push_back({{"center", hist.centers[b]},
                    {"observed", hist.counts[b]},
                    {"expected", expected[b] * static_cast<double>(hist.total)}});
      in_minima += hist.counts[b];
    }
    const double per_2000 = 2000.0 * static_cast<double>(in_minima) / static_cast<double>(hist.total);
    j["deepest_minima"] = mj;
    j["paths_in_minima_per_2000"] = per_2000;
    ctx.check("paths_in_deepest_minima_per_2000", per_2000, c.checks.max_minimum_paths);
    if (mins.size() < 3) ctx.check("deepest_minima_found", static_cast<double>(mins.size()), 3.0, ">=");
  }
  ctx.out.json("trajectories.json", j);
  ctx.summary.results = {{"p_value", chi.p_value}, {"completed", bundle.completed()}};
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& config, const std::vector<std::string>& warnings) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.kind = config.kind;
  summary.warnings = warnings;
  summary.effective_config = effective_json(config);
  OutputDir out{fs::path(config.output)};
  Context ctx{config, out, summary, "setup"};
  try {
    out.json("effective_config.json", summary.effective_config);
    switch (config.kind) {
      case ScenarioKind::exponent_scan: run_exponent_scan(ctx); break;
      case ScenarioKind::eigensolve: run_eigensolve(ctx); break;
      case ScenarioKind::condition_check: run_condition_check(ctx); break;
      case ScenarioKind::dynamics: run_dynamics(ctx); break;
      case ScenarioKind::trajectories: run_trajectories(ctx); break;
    }
  } catch (const std::exception& e) {
    summary.failed_stage = ctx.stage;
    summary.error = to_string(config.kind) + " scenario, stage " + ctx.stage + ": " + e.what();
  }
  summary.inventory = out.inventory();
  summary.ok = summary.failed_stage.empty();
  for (const CheckResult& ck : summary.checks) summary.ok = summary.ok && ck.passed;
  summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream os(out.dir() / "summary.json", std::ios::binary | std::ios::trunc);
  os << summary_json(summary).dump(2) << '\n';
  return summary;
}

ordered_json summary_json(const RunSummary& s) {
  ordered_json j;
  j["kind"] = to_string(s.kind);
  j["ok"] = s.ok;
  if (!s.failed_stage.empty()) {
    j["failed_stage"] = s.failed_stage;
    j["error"] = s.error;
    j["partial"] = true;
  }
  j["wall_time_s"] = s.wall_time;
  if (s.effective_config.contains("seed")) j["seed"] = s.effective_config["seed"];
  ordered_json checks = ordered_json::array();
  for (const CheckResult& c : s.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"measured", c.measured},
                      {"comparison", c.comparison},
                      {"tolerance", c.tolerance}});
  j["checks"] = checks;
  j["results"] = s.results;
  j["warnings"] = s.warnings;
  ordered_json inv = ordered_json::array();
  for (const OutputFile& f : s.inventory) inv.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["inventory"] = inv;
  j["effective_config"] = s.effective_config;
  return j;
}

}  // namespace qbohm
