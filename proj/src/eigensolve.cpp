#include "qbohm/eigensolve.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qbohm/error.hpp"
#include "qbohm/field_ops.hpp"

namespace qbohm {

namespace {

bool is_interior(const Grid& g, std::size_t k) {
  auto [i, j] = g.multi_index(k);
  if (i <= 0 || i >= g.points(0) - 1) return false;
  if (g.dim() == 2 && (j <= 0 || j >= g.points(1) - 1)) return false;
  return true;
}

// Sum over all grid edges of (dR / h)^2 times the cell volume.
double edge_energy(const ScalarField& r) {
  const Grid& g = r.grid();
  const double vol = g.cell_volume();
  double s = 0.0;
  const int n0 = g.points(0);
  const int n1 = g.dim() == 2 ? g.points(1) : 1;
  const double h0 = g.spacing(0);
  for (int i = 0; i + 1 < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const double d = (r.at(i + 1, j) - r.at(i, j)) / h0;
      s += d * d;
    }
  if (g.dim() == 2) {
    const double h1 = g.spacing(1);
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j + 1 < n1; ++j) {
        const double d = (r.at(i, j + 1) - r.at(i, j)) / h1;
        s += d * d;
      }
  }
  return s * vol;
}

// Minus the 3/5-point Laplacian at interior point k, using actual neighbours.
double neg_lap(std::span<const double> r, const Grid& g, std::size_t k) {
  auto [i, j] = g.multi_index(k);
  const double h0 = g.spacing(0);
  double out = (2.0 * r[k] - r[g.index(i + 1, j)] - r[g.index(i - 1, j)]) / (h0 * h0);
  if (g.dim() == 2) {
    const double h1 = g.spacing(1);
    out += (2.0 * r[k] - r[g.index(i, j + 1)] - r[g.index(i, j - 1)]) / (h1 * h1);
  }
  return out;
}

void require_supported(const AnsatzExponents& e) {
  if (!e.is_bohmian() && !e.is_constant()) {
    throw Error(ErrorKind::unsupported_ansatz,
                "energy minimization supports only the Bohmian (-1,0,1) and constant (0,0,0) ansatz, got " +
                    e.label());
  }
}

std::vector<double> flow_potential(const Grid& g, const std::optional<ScalarField>& phase, const Units& u) {
  std::vector<double> out(g.size(), 0.0);
  if (!phase) return out;
  require_same_grid(g, phase->grid(), "phase field");
  const VectorField gs = gradient(*phase);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = gs.norm_squared(i) / (2.0 * u.mass);
  return out;
}

}  // namespace

RayleighResult rayleigh_terms(const ScalarField& r_in, const ScalarField& s, const ScalarField& v,
                              const AnsatzExponents& e, const Units& units) {
  require_same_grid(r_in.grid(), s.grid(), "rayleigh_lambda(R, S)");
  require_same_grid(r_in.grid(), v.grid(), "rayleigh_lambda(R, V)");
  const double norm = integrate(square(r_in));
  if (!(norm > 0.0)) throw Error(ErrorKind::zero_density, "R has zero norm");
  RayleighResult out;
  out.renormalized = std::abs(norm - 1.0) > 1e-8;
  const ScalarField r = (1.0 / std::sqrt(norm)) * r_in;
  const ScalarField r2 = square(r);

  const VectorField gs = gradient(s);
  std::vector<double> kin(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) kin[i] = gs.norm_squared(i) / (2.0 * units.mass);
  out.breakdown.flow = integrate(r2 * ScalarField(r.grid(), std::move(kin)));
  out.breakdown.external = integrate(r2 * v);
  if (e.is_bohmian()) {
    out.breakdown.quantum = -e.A * edge_energy(r);
  } else {
    const QEvaluation q = eval_ansatz(r, e);
    out.breakdown.quantum = integrate(r2 * q.q);
  }
  out.lambda = out.breakdown.total();
  return out;
}

double rayleigh_lambda(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                       const AnsatzExponents& e, const Units& units) {
  return rayleigh_terms(r, s, v, e, units).lambda;
}

ScalarField energy_gradient(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                            const AnsatzExponents& e, const Units& units) {
  require_supported(e);
  const Grid& g = r.grid();
  const double norm = integrate(square(r));
  const double lambda = rayleigh_lambda(r, s, v, e, units);
  const auto veff = flow_potential(g, s, units);
  const double w = g.cell_volume();
  const double kinetic = e.is_bohmian() ? -e.A : 0.0;
  const double shift = e.is_constant() ? e.A : 0.0;
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!is_interior(g, k)) continue;
    const double hr = kinetic * neg_lap(r.values(), g, k) + (v[k] + veff[k] + shift) * r[k];
    out[k] = 2.0 * w * (hr - lambda * r[k]) / norm;
  }
  return ScalarField(g, std::move(out), Quantity::other);
}

ScalarField fix_sign(const ScalarField& r) {
  const double c = r[r.grid().center_index()];
  double sign = 1.0;
  if (c < 0.0) {
    sign = -1.0;
  } else if (c == 0.0) {
    const double m = r.max_abs();
    for (double x : r.values()) {
      if (std::abs(x) == m) {
        sign = x < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
  }
  return sign < 0.0 ? -r : r;
}

EnergyReport minimize_energy(const ScalarField& v, const AnsatzExponents& e, const Units& units,
                             const SolverOptions& opts) {
  require_supported(e);
  e.validate(true);
  const Grid& g = v.grid();
  for (int d = 0; d < g.dim(); ++d)
    if (g.points(d) < 3) throw Error(ErrorKind::degenerate_grid, "minimization needs >= 3 points per axis");

  const auto veff = flow_potential(g, opts.phase, units);
  const double kinetic = e.is_bohmian() ? -e.A : 0.0;
  const double shift = e.is_constant() ? e.A : 0.0;
  const double w = g.cell_volume();
  double hmin = g.spacing(0);
  if (g.dim() == 2) hmin = std::min(hmin, g.spacing(1));
  double tau = opts.step.value_or(0.4 * hmin * hmin * units.mass / (units.hbar * units.hbar));
  if (!(tau > 0.0)) throw Error(ErrorKind::step_size, "relaxation step must be positive");

  std::vector<std::size_t> interior;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (is_interior(g, k)) interior.push_back(k);

  std::vector<double> r(g.size(), 0.0);
  if (opts.initial) {
    require_same_grid(g, opts.initial->grid(), "initial guess");
    for (std::size_t k : interior) r[k] = (*opts.initial)[k];
  } else {
    for (std::size_t k : interior) {
      const Point x = g.position(k);
      double val = 1.0;
      for (int d = 0; d < g.dim(); ++d) {
        const Axis& a = g.axis(d);
        val *= std::sin(std::numbers::pi * (x[static_cast<std::size_t>(d)] - a.min) / a.length());
      }
      r[k] = val;
    }
  }
  auto normalize = [&](std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t k : interior) s += w * x[k] * x[k];
    if (!(s > 0.0)) throw Error(ErrorKind::zero_density, "relaxation state collapsed to zero");
    const double f = 1.0 / std::sqrt(s);
    for (std::size_t k : interior) x[k] *= f;
  };
  normalize(r);

  std::vector<double> hr(g.size(), 0.0), grad(g.size(), 0.0), best = r;
  auto apply = [&](const std::vector<double>& x) {
    double lam = 0.0;
    for (std::size_t k : interior) {
      hr[k] = kinetic * neg_lap(x, g, k) + (v[k] + veff[k] + shift) * x[k];
      lam += w * x[k] * hr[k];
    }
    double gn = 0.0;
    for (std::size_t k : interior) {
      grad[k] = hr[k] - lam * x[k];
      gn += w * grad[k] * grad[k];
    }
    return std::pair{lam, std::sqrt(gn)};
  };

  EnergyReport report{ScalarField::constant(g, 0.0), 0.0, {}, 0, false, 0.0, 0.0, 0, {}};
  auto [lambda, gnorm] = apply(r);
  double best_lambda = lambda;
  int rising = 0;
  long it = 0;
  for (; it < opts.max_iterations && gnorm > opts.tol_grad; ++it) {
    for (std::size_t k : interior) r[k] -= tau * grad[k];
    normalize(r);
    std::tie(lambda, gnorm) = apply(r);
    // Measured against the best value so far: an unstable step oscillates
    // rather than rising monotonically.
    if (!std::isfinite(lambda)) {
      rising = opts.divergence_window;
    } else if (lambda > best_lambda + 1e-13 * std::max(1.0, std::abs(best_lambda))) {
      ++rising;
    } else {
      rising = 0;
    }
    if (std::isfinite(lambda) && lambda <= best_lambda) {
      best_lambda = lambda;
      best = r;
    }
    if (rising >= opts.divergence_window) {
      if (++report.step_halvings > opts.max_step_halvings) {
        std::ostringstream msg;
        msg << "lambda kept increasing after " << opts.max_step_halvings
            << " step halvings; retry with a smaller step (last tau = " << tau << ")";
        throw Error(ErrorKind::step_size, msg.str());
      }
      tau *= 0.5;
      r = best;
      std::tie(lambda, gnorm) = apply(r);
      rising = 0;
      continue;
    }
    if (opts.record_trace) report.lambda_trace.push_back(lambda);
  }

  report.r_opt = fix_sign(ScalarField(g, std::move(r)));
  const RayleighResult terms =
      rayleigh_terms(report.r_opt, opts.phase.value_or(ScalarField::constant(g, 0.0, Quantity::action)), v, e, units);
  report.breakdown = terms.breakdown;
  report.lambda = terms.lambda;
  report.iterations = it;
  report.gradient_norm = gnorm;
  report.converged = gnorm <= opts.tol_grad;
  report.step = tau;
  return report;
}

namespace {

ScalarField embed(const Grid& g, const std::vector<std::size_t>& interior, const Eigen::VectorXd& x) {
  std::vector<double> full(g.size(), 0.0);
  for (std::size_t a = 0; a < interior.size(); ++a) full[interior[a]] = x[static_cast<Eigen::Index>(a)];
  ScalarField f(g, std::move(full));
  f = normalize_density(f);
  return fix_sign(f);
}

// Lowest k eigenpairs of a sparse SPD-shiftable matrix by Lanczos on
// (H - sigma)^-1 with full reorthogonalization.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> shift_invert_lanczos(const Eigen::SparseMatrix<double>& h,
                                                                 double sigma, int k) {
  const Eigen::Index n = h.rows();
  Eigen::SparseMatrix<double> shifted = h;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::linear_solve, "factorization of H - sigma failed");

  double scale = 0.0;
  for (Eigen::Index col = 0; col < h.outerSize(); ++col) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(h, col); it; ++it) sum += std::abs(it.value());
    scale = std::max(scale, sum);
  }
  Eigen::Index m = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * k + 20, 40));
  for (;;) {
    Eigen::MatrixXd q(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    v.normalize();
    Eigen::Index steps = m;
    for (Eigen::Index j = 0; j < m; ++j) {
      q.col(j) = v;
      Eigen::VectorXd wv = solver.solve(v);
      alpha[j] = v.dot(wv);
      for (int pass = 0; pass < 2; ++pass) wv -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * wv);
      beta[j] = wv.norm();
      if (beta[j] < 1e-14 || j + 1 == m) {
        steps = j + 1;
        break;
      }
      v = wv / beta[j];
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
    for (Eigen::Index j = 0; j < steps; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    // Largest Ritz values of the inverse are the lowest eigenvalues of H.
    const int want = std::min<int>(k, static_cast<int>(steps));
    Eigen::VectorXd vals(want);
    Eigen::MatrixXd vecs(n, want);
    bool ok = want == k;
    for (int a = 0; a < want; ++a) {
      const Eigen::Index col = steps - 1 - a;
      Eigen::VectorXd y = q.leftCols(steps) * es.eigenvectors().col(col);
      y.normalize();
      Eigen::VectorXd hy = h * y;
      const double lam = y.dot(hy);
      vals[a] = lam;
      vecs.col(a) = y;
      if ((hy - lam * y).norm() > 1e-9 * scale) ok = false;
    }
    if (ok || m == n) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(want));
      for (int a = 0; a < want; ++a) order[static_cast<std::size_t>(a)] = a;
      std::sort(order.begin(), order.end(), [&](auto x, auto y) { return vals[x] < vals[y]; });
      Eigen::VectorXd sv(want);
      Eigen::MatrixXd svec(n, want);
      for (int a = 0; a < want; ++a) {
        sv[a] = vals[order[static_cast<std::size_t>(a)]];
        svec.col(a) = vecs.col(order[static_cast<std::size_t>(a)]);
      }
      return {sv, svec};
    }
    m = std::min<Eigen::Index>(n, 2 * m);
  }
}

}  // namespace

OracleSpectrum schrodinger_oracle(const ScalarField& v, int k, const Units& units) {
  const Grid& g = v.grid();
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (is_interior(g, i)) interior.push_back(i);
  if (k < 1 || static_cast<std::size_t>(k) > interior.size()) {
    std::ostringstream msg;
    msg << "requested " << k << " eigenpairs but the grid has " << interior.size() << " interior points";
    throw Error(ErrorKind::out_of_range, msg.str());
  }
  const double c = units.hbar * units.hbar / (2.0 * units.mass);
  OracleSpectrum out;

  if (g.dim() == 1) {
    const auto n = static_cast<Eigen::Index>(interior.size());
    const double h = g.spacing(0);
    Eigen::VectorXd diag(n), sub(n > 1 ? n - 1 : 1);
    for (Eigen::Index a = 0; a < n; ++a) diag[a] = 2.0 * c / (h * h) + v[interior[static_cast<std::size_t>(a)]];
    for (Eigen::Index a = 0; a + 1 < n; ++a) sub[a] = -c / (h * h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(std::max<Eigen::Index>(n - 1, 0)), Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::linear_solve, "tridiagonal eigensolver failed");
    for (int a = 0; a < k; ++a) {
      out.eigenvalues.push_back(es.eigenvalues()[a]);
      out.eigenvectors.push_back(embed(g, interior, es.eigenvectors().col(a)));
    }
    return out;
  }

  std::vector<Eigen::Index> slot(g.size(), -1);
  for (std::size_t a = 0; a < interior.size(); ++a) slot[interior[a]] = static_cast<Eigen::Index>(a);
  const double h0 = g.spacing(0), h1 = g.spacing(1);
  std::vector<Eigen::Triplet<double>> trip;
  double vmin = v[interior.front()];
  for (std::size_t a = 0; a < interior.size(); ++a) {
    const std::size_t idx = interior[a];
    auto [i, j] = g.multi_index(idx);
    const auto row = static_cast<Eigen::Index>(a);
    vmin = std::min(vmin, v[idx]);
    trip.emplace_back(row, row, 2.0 * c / (h0 * h0) + 2.0 * c / (h1 * h1) + v[idx]);
    const std::pair<std::size_t, double> nbrs[] = {{g.index(i - 1, j), h0}, {g.index(i + 1, j), h0},
                                                   {g.index(i, j - 1), h1}, {g.index(i, j + 1), h1}};
    for (auto [nb, hh] : nbrs)
      if (slot[nb] >= 0) trip.emplace_back(row, slot[nb], -c / (hh * hh));
  }
  const auto n = static_cast<Eigen::Index>(interior.size());
  Eigen::SparseMatrix<double> h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  auto [vals, vecs] = shift_invert_lanczos(h, vmin - 1.0, k);
  for (int a = 0; a < k; ++a) {
    out.eigenvalues.push_back(vals[a]);
    out.eigenvectors.push_back(embed(g, interior, vecs.col(a)));
  }
  return out;
}

}  // namespace qbohm
