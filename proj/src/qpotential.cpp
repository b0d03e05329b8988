#include "qbohm/qpotential.hpp"

#include <cmath>
#include <sstream>

#include "qbohm/error.hpp"
#include "qbohm/field_ops.hpp"

namespace qbohm {

void AnsatzExponents::validate(bool allow_zero_potential) const {
  if (!std::isfinite(A)) throw Error(ErrorKind::invalid_argument, "ansatz coefficient A must be finite");
  if (A == 0.0 && !allow_zero_potential)
    throw Error(ErrorKind::invalid_argument, "ansatz coefficient A is zero; pass allow_zero_potential for Q = 0");
}

std::string AnsatzExponents::label() const {
  std::ostringstream os;
  os << "(" << m << "," << n << "," << p << ")";
  return os.str();
}

double ipow(double x, int k) {
  if (k < 0) return 1.0 / ipow(x, -k);
  double r = 1.0;
  double b = x;
  while (k) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

std::size_t QEvaluation::valid_count() const {
  std::size_t c = 0;
  for (auto v : valid) c += v ? 1 : 0;
  return c;
}

double QEvaluation::masked_fraction() const {
  return 1.0 - static_cast<double>(valid_count()) / static_cast<double>(valid.size());
}

QEvaluation eval_bohmian(const ScalarField& r, double a, double eps_r) {
  const ScalarField lap = laplacian(r);
  const double cutoff = eps_r * r.max_abs();
  std::vector<double> q(r.size(), 0.0);
  std::vector<std::uint8_t> valid(r.size(), 0);
  std::size_t good = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::abs(r[i]) < cutoff || r[i] == 0.0) continue;
    q[i] = a * lap[i] / r[i];
    valid[i] = 1;
    ++good;
  }
  if (good == 0) throw Error(ErrorKind::fully_singular, "R vanishes at every grid point");
  return {ScalarField(r.grid(), std::move(q), Quantity::energy), std::move(valid)};
}

namespace {

// Derivative quantities of R shared by eval_ansatz and ansatz_partials.
struct Local {
  ScalarField lap;
  VectorField grad;
  std::vector<double> grad_norm;
  std::vector<std::uint8_t> valid;
};

Local local_quantities(const ScalarField& r, const AnsatzExponents& e, const SingularityThresholds& t) {
  Local l{laplacian(r), gradient(r), {}, {}};
  l.grad_norm.resize(r.size());
  double gmax = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    l.grad_norm[i] = std::sqrt(l.grad.norm_squared(i));
    gmax = std::max(gmax, l.grad_norm[i]);
  }
  const double r_cut = t.r * r.max_abs();
  const double g_cut = t.grad * gmax;
  const double l_cut = t.lap * l.lap.max_abs();
  // A factor is singular when it, or a partial derivative built from it,
  // carries a negative power: R^(m-1) for m < 0, |grad R|^(n-2) for n < 2
  // (n != 0), (lap R)^(p-1) for p < 0.
  const bool r_sing = e.m < 0;
  const bool g_sing = e.n != 0 && e.n < 2;
  const bool l_sing = e.p < 0;
  l.valid.assign(r.size(), 1);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r_sing && (std::abs(r[i]) < r_cut || r[i] == 0.0)) l.valid[i] = 0;
    if (g_sing && (l.grad_norm[i] < g_cut || l.grad_norm[i] == 0.0)) l.valid[i] = 0;
    if (l_sing && (std::abs(l.lap[i]) < l_cut || l.lap[i] == 0.0)) l.valid[i] = 0;
  }
  return l;
}

void require_support(const std::vector<std::uint8_t>& valid) {
  for (auto v : valid)
    if (v) return;
  throw Error(ErrorKind::fully_singular, "ansatz is singular at every grid point");
}

}  // namespace

QEvaluation eval_ansatz(const ScalarField& r, const AnsatzExponents& e, const SingularityThresholds& t) {
  e.validate(true);
  Local l = local_quantities(r, e, t);
  require_support(l.valid);
  std::vector<double> q(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!l.valid[i]) continue;
    q[i] = e.A * ipow(r[i], e.m) * ipow(l.grad_norm[i], e.n) * ipow(l.lap[i], e.p);
  }
  return {ScalarField(r.grid(), std::move(q), Quantity::energy), std::move(l.valid)};
}

AnsatzPartials ansatz_partials(const ScalarField& r, const AnsatzExponents& e,
                               const SingularityThresholds& t) {
  e.validate(true);
  Local l = local_quantities(r, e, t);
  require_support(l.valid);
  const Grid& g = r.grid();
  const int dim = g.dim();
  const std::size_t n = r.size();

  std::vector<double> dr(n, 0.0), dl(n, 0.0);
  std::vector<std::vector<double>> dg(static_cast<std::size_t>(dim), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (!l.valid[i]) continue;
    const double ri = r[i];
    const double gn = l.grad_norm[i];
    const double li = l.lap[i];
    // dQ/dR = m A R^(m-1) |gR|^n L^p
    if (e.m != 0) dr[i] = e.m * e.A * ipow(ri, e.m - 1) * ipow(gn, e.n) * ipow(li, e.p);
    // dQ/d(d_k R) = n A R^m |gR|^(n-2) d_k R L^p
    if (e.n != 0) {
      const double common = e.n * e.A * ipow(ri, e.m) * ipow(gn, e.n - 2) * ipow(li, e.p);
      for (int k = 0; k < dim; ++k) dg[static_cast<std::size_t>(k)][i] = common * l.grad[k][i];
    }
    // dQ/d(d_i d_j R) = p A R^m |gR|^n L^(p-1) delta_ij
    if (e.p != 0) dl[i] = e.p * e.A * ipow(ri, e.m) * ipow(gn, e.n) * ipow(li, e.p - 1);
  }

  std::vector<ScalarField> grad_parts;
  for (int k = 0; k < dim; ++k)
    grad_parts.emplace_back(g, std::move(dg[static_cast<std::size_t>(k)]), Quantity::other);
  std::vector<ScalarField> hess;
  const ScalarField diag(g, std::move(dl), Quantity::other);
  const ScalarField zero = ScalarField::constant(g, 0.0, Quantity::other);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) hess.push_back(i == j ? diag : zero);

  return {ScalarField(g, std::move(dr), Quantity::other), VectorField(std::move(grad_parts)),
          std::move(hess), std::move(l.valid)};
}

}  // namespace qbohm
