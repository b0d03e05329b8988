#include "qbohm/elvariation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qbohm/error.hpp"
#include "qbohm/field_ops.hpp"
#include "qbohm/parallel.hpp"
#include "qbohm/stats.hpp"

namespace qbohm {

namespace {

// A point is usable when it and every stencil neighbour (including diagonal
// neighbours in 2D) is unmasked, and it lies outside the boundary margin.
std::vector<std::uint8_t> interior_mask(const Grid& g, const std::vector<std::uint8_t>& valid,
                                        int margin, int reach) {
  std::vector<std::uint8_t> out(g.size(), 0);
  const int n0 = g.points(0);
  const int n1 = g.dim() == 2 ? g.points(1) : 1;
  const int m1 = g.dim() == 2 ? margin : 0;
  const int r1 = g.dim() == 2 ? reach : 0;
  for (int i = margin; i < n0 - margin; ++i) {
    for (int j = m1; j < n1 - m1; ++j) {
      bool ok = true;
      for (int di = -reach; di <= reach && ok; ++di)
        for (int dj = -r1; dj <= r1 && ok; ++dj) {
          const int a = i + di, b = j + dj;
          if (a < 0 || a >= n0 || b < 0 || b >= n1 || !valid[g.index(a, b)]) ok = false;
        }
      out[g.index(i, j)] = ok ? 1 : 0;
    }
  }
  return out;
}

double sup_over(const ScalarField& f, const std::vector<std::uint8_t>& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (mask[i]) s = std::max(s, std::abs(f[i]));
  return s;
}

}  // namespace

ConditionResidual condition_residual(const ScalarField& r, const AnsatzExponents& e,
                                     const ResidualOptions& opts) {
  const AnsatzPartials parts = ansatz_partials(r, e, opts.thresholds);
  const Grid& g = r.grid();
  const int dim = g.dim();

  std::size_t good = 0;
  for (auto v : parts.valid) good += v ? 1 : 0;
  const double support = static_cast<double>(good) / static_cast<double>(g.size());
  if (support < opts.min_support) {
    std::ostringstream msg;
    msg << "only " << support * 100.0 << "% of points are unmasked for " << e.label();
    throw Error(ErrorKind::insufficient_support, msg.str());
  }

  const ScalarField r2 = square(r);
  const ScalarField term1 = r2 * parts.d_r;
  ScalarField flux_div = ScalarField::constant(g, 0.0, Quantity::other);
  for (int i = 0; i < dim; ++i) flux_div = flux_div + derivative(r2 * parts.d_grad[i], i);
  const ScalarField term2 = -flux_div;
  ScalarField term3 = ScalarField::constant(g, 0.0, Quantity::other);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const ScalarField inner = r2 * parts.hess(i, j);
      term3 = term3 + (i == j ? second_derivative(inner, i) : derivative(derivative(inner, i), j));
    }
  }
  ScalarField total = term1 + term2 + term3;

  ConditionResidual out{total, {term1, term2, term3},
                        interior_mask(g, parts.valid, opts.boundary_margin, 1)};
  std::size_t usable = 0;
  const std::vector<double> w = quadrature_weights(g);
  double l2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!out.valid[i]) continue;
    ++usable;
    l2 += w[i] * total[i] * total[i];
  }
  out.valid_fraction = static_cast<double>(usable) / static_cast<double>(g.size());
  out.norm_sup = sup_over(total, out.valid);
  out.norm_l2 = std::sqrt(l2);
  double l2_scale = 0.0;
  for (const auto& t : out.terms) {
    out.term_scale = std::max(out.term_scale, sup_over(t, out.valid));
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (out.valid[i]) acc += w[i] * t[i] * t[i];
    l2_scale = std::max(l2_scale, std::sqrt(acc));
  }
  if (out.term_scale > 0.0) out.normalized_sup = out.norm_sup / out.term_scale;
  if (l2_scale > 0.0) out.normalized_l2 = out.norm_l2 / l2_scale;
  return out;
}

bool ScanBounds::exhaustive() const {
  auto covers = [](const ExponentRange& r) { return r.lo <= -2 && r.hi >= 2; };
  return covers(m) && covers(n) && covers(p);
}

ScalarField gaussian_mixture(const Grid& grid, const std::vector<GaussianBump>& bumps) {
  return ScalarField::from_function(grid, [&](const Point& x) {
    double s = 0.0;
    for (const auto& b : bumps) {
      double arg = 0.0;
      for (int d = 0; d < grid.dim(); ++d) {
        const auto sd = static_cast<std::size_t>(d);
        const double z = (x[sd] - b.center[sd]) / b.width[sd];
        arg += 0.5 * z * z;
      }
      s += b.amplitude * std::exp(-arg);
    }
    return s;
  });
}

ProbeDescriptor make_probe(const Grid& grid, std::uint64_t seed) {
  Rng rng(seed);
  ProbeDescriptor probe;
  probe.seed = seed;
  const int count = 2 + static_cast<int>(uniform01(rng) * 2.0);
  for (int k = 0; k < count; ++k) {
    GaussianBump b;
    b.amplitude = uniform(rng, 0.3, 1.0);
    for (int d = 0; d < grid.dim(); ++d) {
      const auto sd = static_cast<std::size_t>(d);
      const Axis& a = grid.axis(d);
      const double mid = 0.5 * (a.min + a.max);
      b.center[sd] = mid + uniform(rng, -0.2, 0.2) * a.length();
      b.width[sd] = uniform(rng, 0.06, 0.15) * a.length();
    }
    probe.bumps.push_back(b);
  }
  return probe;
}

double ScanReport::min_nonsolution_residual() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates)
    if (!c.solution) m = std::min(m, c.max_residual);
  return m;
}

namespace {

Grid refine(const Grid& g) {
  auto twice = [](Axis a) {
    a.points = 2 * (a.points - 1) + 1;
    return a;
  };
  return g.dim() == 1 ? Grid(twice(g.axis(0))) : Grid(twice(g.axis(0)), twice(g.axis(1)));
}

constexpr int kMaxProbeAttempts = 10;

}  // namespace

ScanReport exponent_scan(const ScanBounds& bounds, const ScanOptions& opts) {
  if (opts.probes < 3) throw Error(ErrorKind::invalid_argument, "exponent scan needs at least 3 probes");
  for (const auto* r : {&bounds.m, &bounds.n, &bounds.p})
    if (r->hi < r->lo) throw Error(ErrorKind::invalid_argument, "exponent range has hi < lo");

  ScanReport report;
  report.bounds = bounds;
  report.probe_count = opts.probes;
  report.seed = opts.seed;
  report.tolerance = opts.tolerance;
  report.grid = opts.grid;
  report.exhaustive = bounds.exhaustive();

  for (int m = bounds.m.lo; m <= bounds.m.hi; ++m)
    for (int n = bounds.n.lo; n <= bounds.n.hi; ++n)
      for (int p = bounds.p.lo; p <= bounds.p.hi; ++p) {
        CandidateResult c;
        c.exponents = {m, n, p, opts.coefficient};
        report.candidates.push_back(c);
      }
  const std::size_t nc = report.candidates.size();

  auto evaluate_all = [&](const ScalarField& r, std::vector<double>& out) {
    out.assign(nc, 0.0);
    parallel_for(nc, opts.threads, [&](std::size_t i) {
      out[i] = condition_residual(r, report.candidates[i].exponents, opts.residual).normalized_sup;
    });
  };

  std::vector<double> residuals;
  for (int k = 0; k < opts.probes; ++k) {
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxProbeAttempts && !accepted; ++attempt) {
      ProbeDescriptor probe = make_probe(opts.grid, derive_seed(opts.seed, static_cast<std::uint64_t>(k),
                                                                static_cast<std::uint64_t>(attempt)));
      probe.attempt = attempt;
      try {
        evaluate_all(gaussian_mixture(opts.grid, probe.bumps), residuals);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::insufficient_support && err.kind() != ErrorKind::fully_singular) throw;
        continue;
      }
      for (std::size_t i = 0; i < nc; ++i) report.candidates[i].probe_residuals.push_back(residuals[i]);
      report.probes.push_back(std::move(probe));
      accepted = true;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "probe " << k << " failed support checks " << kMaxProbeAttempts << " times";
      throw Error(ErrorKind::probe_generation, msg.str());
    }
  }

  const double band_lo = opts.tolerance * opts.band_low;
  const double band_hi = opts.tolerance * opts.band_high;
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < nc; ++i) {
    auto& c = report.candidates[i];
    c.max_residual = *std::max_element(c.probe_residuals.begin(), c.probe_residuals.end());
    c.near_threshold = c.max_residual >= band_lo && c.max_residual <= band_hi;
    if (c.near_threshold) near.push_back(i);
    c.solution = !c.near_threshold && c.max_residual <= opts.tolerance;
  }

  if (!near.empty()) {
    const Grid fine = refine(opts.grid);
    std::vector<double> worst(near.size(), 0.0);
    for (const auto& probe : report.probes) {
      const ScalarField r = gaussian_mixture(fine, probe.bumps);
      parallel_for(near.size(), opts.threads, [&](std::size_t k) {
        const double v = condition_residual(r, report.candidates[near[k]].exponents, opts.residual).normalized_sup;
        worst[k] = std::max(worst[k], v);
      });
    }
    for (std::size_t k = 0; k < near.size(); ++k) {
      auto& c = report.candidates[near[k]];
      c.refined_residual = worst[k];
      c.observed_order = worst[k] > 0.0 ? std::log2(c.max_residual / worst[k])
                                        : std::numeric_limits<double>::infinity();
      c.solution = *c.refined_residual <= opts.tolerance && *c.observed_order >= opts.min_order;
    }
  }

  for (const auto& c : report.candidates)
    if (c.solution) report.solutions.push_back(c.exponents.exponents());
  return report;
}

namespace {

ResidualField finish_residual(const ScalarField& r, std::vector<double> values,
                              std::vector<std::uint8_t> valid, int margin) {
  const Grid& g = r.grid();
  ScalarField field(g, std::move(values), Quantity::energy);
  const auto interior = interior_mask(g, valid, margin, 0);
  double rmax2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) rmax2 = std::max(rmax2, r[i] * r[i]);
  double sup = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!interior[i]) continue;
    sup = std::max(sup, std::abs(field[i]));
    if (rmax2 > 0.0) weighted = std::max(weighted, r[i] * r[i] / rmax2 * std::abs(field[i]));
  }
  return {std::move(field), std::move(valid), sup, weighted};
}

ResidualField hj_impl(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                      const std::function<double(std::size_t)>& lambda, const AnsatzExponents& e,
                      const Units& units, int margin) {
  require_same_grid(r.grid(), s.grid(), "hj_residual(R, S)");
  require_same_grid(r.grid(), v.grid(), "hj_residual(R, V)");
  const QEvaluation q = eval_ansatz(r, e);
  const VectorField gs = gradient(s);
  std::vector<double> out(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!q.valid[i]) continue;
    out[i] = gs.norm_squared(i) / (2.0 * units.mass) + v[i] + q.q[i] - lambda(i);
  }
  return finish_residual(r, std::move(out), q.valid, margin);
}

}  // namespace

ResidualField hj_residual(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                          double lambda, const AnsatzExponents& e, const Units& units,
                          int boundary_margin) {
  return hj_impl(r, s, v, [lambda](std::size_t) { return lambda; }, e, units, boundary_margin);
}

ResidualField hj_residual(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                          const ScalarField& lambda, const AnsatzExponents& e, const Units& units,
                          int boundary_margin) {
  require_same_grid(r.grid(), lambda.grid(), "hj_residual(R, lambda)");
  return hj_impl(r, s, v, [&lambda](std::size_t i) { return lambda[i]; }, e, units, boundary_margin);
}

ScalarField stationary_continuity_residual(const ScalarField& r, const ScalarField& s,
                                           const Units& units) {
  require_same_grid(r.grid(), s.grid(), "stationary_continuity_residual");
  const ScalarField r2 = square(r);
  const VectorField gs = gradient(s);
  std::vector<ScalarField> flux;
  for (int d = 0; d < r.grid().dim(); ++d) flux.push_back((1.0 / units.mass) * (r2 * gs[d]));
  return divergence(VectorField(std::move(flux))).with_quantity(Quantity::other);
}

}  // namespace qbohm
