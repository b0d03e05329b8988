#include "qbohm/dynamics.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "qbohm/error.hpp"
#include "qbohm/field_ops.hpp"

namespace qbohm {

using cplx = std::complex<double>;

ComplexFieldState ComplexFieldState::from_values(const Grid& g, const std::vector<cplx>& psi, double t) {
  std::vector<double> re(psi.size()), im(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    re[i] = psi[i].real();
    im[i] = psi[i].imag();
  }
  return {ScalarField(g, std::move(re)), ScalarField(g, std::move(im)), t};
}

std::vector<cplx> ComplexFieldState::values() const {
  std::vector<cplx> out(re.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {re[i], im[i]};
  return out;
}

ScalarField ComplexFieldState::density() const {
  return (square(re) + square(im)).with_quantity(Quantity::density);
}

double ComplexFieldState::norm() const { return integrate(density()); }

double polar_step_limit(const Grid& g, const Units& units) {
  double h = g.spacing(0);
  if (g.dim() == 2) h = std::min(h, g.spacing(1));
  return 0.2 * h * h * units.mass / units.hbar;
}

namespace {

void require_node_free(const ScalarField& r, double threshold, const char* when) {
  const double mx = r.max();
  const double mn = r.min();
  if (!(mn > 0.0) || mn < threshold * mx) {
    std::ostringstream msg;
    msg << "R has (near-)nodes " << when << " (min R / max R = " << (mx > 0.0 ? mn / mx : 0.0)
        << "); use the wavefunction integrator for states with nodes";
    throw Error(ErrorKind::node_breakdown, msg.str());
  }
}

struct Rates {
  std::vector<double> du;
  std::vector<double> ds;
};

// Right-hand side in (u = ln R^2, S).
Rates polar_rates(const Grid& g, const std::vector<double>& u, const std::vector<double>& s,
                  const ScalarField& v, const Units& units) {
  const ScalarField uf(g, u);
  const ScalarField sf(g, s);
  const VectorField gu = gradient(uf);
  const VectorField gs = gradient(sf);
  const ScalarField lu = laplacian(uf);
  const ScalarField ls = laplacian(sf);
  const double c = units.hbar * units.hbar / (2.0 * units.mass);
  Rates out{std::vector<double>(g.size()), std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    double dot = 0.0;
    for (int d = 0; d < g.dim(); ++d) dot += gu[d][i] * gs[d][i];
    // lap R / R = lap u / 2 + |grad u|^2 / 4 for R = exp(u / 2).
    const double q = -c * (0.5 * lu[i] + 0.25 * gu.norm_squared(i));
    out.ds[i] = -(gs.norm_squared(i) / (2.0 * units.mass) + v[i] + q);
    out.du[i] = -(ls[i] + dot) / units.mass;
  }
  return out;
}

}  // namespace

PolarStep step_polar(const PolarState& state, const ScalarField& v, double dt, const Units& units,
                     const PolarStepOptions& opts) {
  const Grid& g = state.r.grid();
  require_same_grid(g, state.s.grid(), "step_polar(R, S)");
  require_same_grid(g, v.grid(), "step_polar(R, V)");
  const double limit = polar_step_limit(g, units);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " outside (0, " << limit << "]";
    throw Error(ErrorKind::step_size, msg.str());
  }
  require_node_free(state.r, opts.node_threshold, "before the step");

  const std::size_t n = g.size();
  std::vector<double> u(n), s(state.s.values().begin(), state.s.values().end());
  for (std::size_t i = 0; i < n; ++i) u[i] = 2.0 * std::log(state.r[i]);

  auto axpy = [n](const std::vector<double>& x, double a, const std::vector<double>& y) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
    return out;
  };
  const Rates k1 = polar_rates(g, u, s, v, units);
  const Rates k2 = polar_rates(g, axpy(u, 0.5 * dt, k1.du), axpy(s, 0.5 * dt, k1.ds), v, units);
  const Rates k3 = polar_rates(g, axpy(u, 0.5 * dt, k2.du), axpy(s, 0.5 * dt, k2.ds), v, units);
  const Rates k4 = polar_rates(g, axpy(u, dt, k3.du), axpy(s, dt, k3.ds), v, units);
  std::vector<double> r_new(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] += dt / 6.0 * (k1.du[i] + 2.0 * k2.du[i] + 2.0 * k3.du[i] + k4.du[i]);
    s[i] += dt / 6.0 * (k1.ds[i] + 2.0 * k2.ds[i] + 2.0 * k3.ds[i] + k4.ds[i]);
    r_new[i] = std::exp(0.5 * u[i]);
  }

  PolarStep out{{ScalarField(g, std::move(r_new), state.r.quantity()),
                 ScalarField(g, std::move(s), Quantity::action), state.t + dt}};
  const double norm = integrate(square(out.state.r));
  out.norm_drift = norm - 1.0;
  if (std::abs(out.norm_drift) > opts.renormalize_above) {
    out.state.r = (1.0 / std::sqrt(norm)) * out.state.r;
    out.renormalized = true;
  }
  require_node_free(out.state.r, opts.node_threshold, "after the step");
  return out;
}

namespace {

// LU without pivoting for a banded matrix with equal lower and upper
// bandwidth. The Crank-Nicolson matrix is strictly diagonally dominant, so
// no pivoting is needed.
class BandLU {
 public:
  // Plain complex product; std::complex operator* carries inf/nan recovery
  // that dominates the inner loops.
  static cplx mul(const cplx& a, const cplx& b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
  }

  void factor(const Eigen::SparseMatrix<cplx>& a, Eigen::Index bw) {
    n_ = a.rows();
    bw_ = bw;
    w_ = 2 * bw + 1;
    band_.assign(static_cast<std::size_t>(n_ * w_), cplx(0.0, 0.0));
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
      for (Eigen::SparseMatrix<cplx>::InnerIterator it(a, c); it; ++it) at(it.row(), it.col()) = it.value();
    for (Eigen::Index k = 0; k < n_; ++k) {
      const cplx pivot = at(k, k);
      const Eigen::Index last = std::min(n_ - 1, k + bw_);
      for (Eigen::Index r = k + 1; r <= last; ++r) {
        cplx& l = at(r, k);
        if (l == cplx(0.0, 0.0)) continue;
        l /= pivot;
        for (Eigen::Index c = k + 1; c <= last; ++c) at(r, c) -= mul(l, at(k, c));
      }
    }
    inv_diag_.resize(static_cast<std::size_t>(n_));
    for (Eigen::Index k = 0; k < n_; ++k) inv_diag_[static_cast<std::size_t>(k)] = 1.0 / at(k, k);
  }

  void solve(Eigen::VectorXcd& x) const {
    for (Eigen::Index r = 0; r < n_; ++r) {
      cplx acc = x[r];
      for (Eigen::Index c = std::max<Eigen::Index>(0, r - bw_); c < r; ++c) acc -= mul(at(r, c), x[c]);
      x[r] = acc;
    }
    for (Eigen::Index r = n_ - 1; r >= 0; --r) {
      cplx acc = x[r];
      const Eigen::Index last = std::min(n_ - 1, r + bw_);
      for (Eigen::Index c = r + 1; c <= last; ++c) acc -= mul(at(r, c), x[c]);
      x[r] = mul(acc, inv_diag_[static_cast<std::size_t>(r)]);
    }
  }

 private:
  cplx& at(Eigen::Index r, Eigen::Index c) { return band_[static_cast<std::size_t>(r * w_ + c - r + bw_)]; }
  const cplx& at(Eigen::Index r, Eigen::Index c) const {
    return band_[static_cast<std::size_t>(r * w_ + c - r + bw_)];
  }
  Eigen::Index n_ = 0, bw_ = 0, w_ = 1;
  std::vector<cplx> band_, inv_diag_;
};

// Above this many band entries the sparse LU is used instead.
constexpr double kMaxBandEntries = 4e7;

}  // namespace

struct CrankNicolson::Impl {
  Impl(Grid g, double step) : grid(std::move(g)), dt(step) {}
  Grid grid;
  double dt;
  std::vector<std::size_t> interior;
  std::vector<Eigen::Index> slot;
  Eigen::SparseMatrix<cplx> rhs_op;
  bool banded = false;
  BandLU band;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
};

CrankNicolson::CrankNicolson(const ScalarField& v, double dt, const Units& units)
    : impl_(std::make_unique<Impl>(v.grid(), dt)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::step_size, "oracle dt must be positive");
  const Grid& g = impl_->grid;
  for (int d = 0; d < g.dim(); ++d)
    if (g.points(d) < 3) throw Error(ErrorKind::degenerate_grid, "oracle needs >= 3 points per axis");
  impl_->slot.assign(g.size(), -1);
  // Unknowns run fastest along the shorter axis so the factor stays banded.
  const int n0 = g.points(0), n1 = g.dim() == 2 ? g.points(1) : 1;
  const bool axis0_fast = g.dim() == 2 && n0 < n1;
  for (int outer = 0; outer < (axis0_fast ? n1 : n0); ++outer)
    for (int inner = 0; inner < (axis0_fast ? n0 : n1); ++inner) {
      const int i = axis0_fast ? inner : outer, j = axis0_fast ? outer : inner;
      bool inside = i > 0 && i < n0 - 1;
      if (g.dim() == 2) inside = inside && j > 0 && j < n1 - 1;
      if (!inside) continue;
      const std::size_t k = g.index(i, j);
      impl_->slot[k] = static_cast<Eigen::Index>(impl_->interior.size());
      impl_->interior.push_back(k);
    }
  const auto n = static_cast<Eigen::Index>(impl_->interior.size());
  const double c = units.hbar * units.hbar / (2.0 * units.mass);
  const cplx factor(0.0, dt / (2.0 * units.hbar));
  std::vector<Eigen::Triplet<cplx>> lhs, rhs;
  for (Eigen::Index a = 0; a < n; ++a) {
    const std::size_t k = impl_->interior[static_cast<std::size_t>(a)];
    auto [i, j] = g.multi_index(k);
    double diag = v[k];
    std::vector<std::pair<std::size_t, double>> nbrs;
    for (int d = 0; d < g.dim(); ++d) {
      const double h = g.spacing(d);
      diag += 2.0 * c / (h * h);
      const std::size_t lo = d == 0 ? g.index(i - 1, j) : g.index(i, j - 1);
      const std::size_t hi = d == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
      nbrs.emplace_back(lo, -c / (h * h));
      nbrs.emplace_back(hi, -c / (h * h));
    }
    lhs.emplace_back(a, a, 1.0 + factor * diag);
    rhs.emplace_back(a, a, 1.0 - factor * diag);
    for (auto [nb, off] : nbrs) {
      const Eigen::Index b = impl_->slot[nb];
      if (b < 0) continue;
      lhs.emplace_back(a, b, factor * off);
      rhs.emplace_back(a, b, -factor * off);
    }
  }
  Eigen::SparseMatrix<cplx> lhs_op(n, n);
  lhs_op.setFromTriplets(lhs.begin(), lhs.end());
  impl_->rhs_op.resize(n, n);
  impl_->rhs_op.setFromTriplets(rhs.begin(), rhs.end());
  const Eigen::Index bw = g.dim() == 2 ? (axis0_fast ? n0 - 2 : n1 - 2) : 1;
  if (static_cast<double>(n) * static_cast<double>(2 * bw + 1) <= kMaxBandEntries) {
    impl_->banded = true;
    impl_->band.factor(lhs_op, bw);
    return;
  }
  impl_->lu.analyzePattern(lhs_op);
  impl_->lu.factorize(lhs_op);
  if (impl_->lu.info() != Eigen::Success)
    throw Error(ErrorKind::linear_solve, "Crank-Nicolson factorization failed: " + impl_->lu.lastErrorMessage());
}

CrankNicolson::~CrankNicolson() = default;
CrankNicolson::CrankNicolson(CrankNicolson&&) noexcept = default;
CrankNicolson& CrankNicolson::operator=(CrankNicolson&&) noexcept = default;

double CrankNicolson::dt() const { return impl_->dt; }

ComplexFieldState CrankNicolson::step(const ComplexFieldState& state) const {
  const Grid& g = impl_->grid;
  require_same_grid(g, state.re.grid(), "Crank-Nicolson step");
  const auto n = static_cast<Eigen::Index>(impl_->interior.size());
  Eigen::VectorXcd psi(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const std::size_t k = impl_->interior[static_cast<std::size_t>(a)];
    psi[a] = cplx(state.re[k], state.im[k]);
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index c = 0; c < impl_->rhs_op.outerSize(); ++c)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(impl_->rhs_op, c); it; ++it)
      rhs[it.row()] += BandLU::mul(it.value(), psi[c]);
  Eigen::VectorXcd next;
  if (impl_->banded) {
    next = std::move(rhs);
    impl_->band.solve(next);
  } else {
    next = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success) throw Error(ErrorKind::linear_solve, "Crank-Nicolson solve failed");
  }
  std::vector<cplx> out(g.size(), cplx(0.0, 0.0));
  for (Eigen::Index a = 0; a < n; ++a) out[impl_->interior[static_cast<std::size_t>(a)]] = next[a];
  return ComplexFieldState::from_values(g, out, state.t + impl_->dt);
}

ComplexFieldState evolve_oracle(const ComplexFieldState& state, const ScalarField& v, double dt, long steps,
                                const Units& units) {
  require_same_grid(state.re.grid(), v.grid(), "evolve_oracle");
  if (steps < 0) throw Error(ErrorKind::invalid_argument, "negative step count");
  if (steps == 0) return state;
  const CrankNicolson cn(v, dt, units);
  ComplexFieldState cur = state;
  for (long k = 0; k < steps; ++k) cur = cn.step(cur);
  return cur;
}

namespace {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

}  // namespace

PolarDecomposition polar_decompose(const ComplexFieldState& state, const Units& units, double mask_threshold) {
  const Grid& g = state.re.grid();
  require_same_grid(g, state.im.grid(), "polar_decompose");
  const std::size_t n = g.size();
  std::vector<double> amp(n), arg(n);
  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    amp[i] = std::hypot(state.re[i], state.im[i]);
    arg[i] = std::atan2(state.im[i], state.re[i]);
    amax = std::max(amax, amp[i]);
  }
  PolarDecomposition out{{ScalarField(g, amp), ScalarField::constant(g, 0.0, Quantity::action), state.t}, {}, {}, 0, false};
  out.valid.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) out.valid[i] = amp[i] >= mask_threshold * amax && amp[i] > 0.0;
  const std::size_t center = g.center_index();
  if (!out.valid[center])
    throw Error(ErrorKind::phase_anchor, "|psi| at the grid centre is below the mask threshold");

  std::vector<double> phase(n, 0.0);
  out.component.assign(n, -1);
  auto neighbours = [&](std::size_t k) {
    std::vector<std::size_t> nb;
    auto [i, j] = g.multi_index(k);
    if (i > 0) nb.push_back(g.index(i - 1, j));
    if (i + 1 < g.points(0)) nb.push_back(g.index(i + 1, j));
    if (g.dim() == 2) {
      if (j > 0) nb.push_back(g.index(i, j - 1));
      if (j + 1 < g.points(1)) nb.push_back(g.index(i, j + 1));
    }
    return nb;
  };
  auto flood = [&](std::size_t anchor, int label) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double a0 = std::fmod(arg[anchor], two_pi);
    if (a0 < 0.0) a0 += two_pi;
    if (a0 >= two_pi) a0 = 0.0;
    phase[anchor] = a0;
    out.component[anchor] = label;
    std::deque<std::size_t> queue{anchor};
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      for (std::size_t nb : neighbours(k)) {
        if (!out.valid[nb] || out.component[nb] >= 0) continue;
        out.component[nb] = label;
        phase[nb] = phase[k] + wrap_angle(arg[nb] - arg[k]);
        queue.push_back(nb);
      }
    }
  };
  flood(center, 0);
  int label = 1;
  for (std::size_t k = 0; k < n; ++k)
    if (out.valid[k] && out.component[k] < 0) flood(k, label++);
  out.components = label;
  out.disconnected = label > 1;
  for (double& p : phase) p *= units.hbar;
  out.state.s = ScalarField(g, std::move(phase), Quantity::action);
  return out;
}

VectorField phase_gradient(const ComplexFieldState& state, const Units& units, double mask_threshold) {
  const Grid& g = state.re.grid();
  const ScalarField rho = state.density();
  const double cut = mask_threshold * mask_threshold * rho.max();
  std::vector<ScalarField> comps;
  for (int d = 0; d < g.dim(); ++d) {
    const ScalarField dre = derivative(state.re, d);
    const ScalarField dim = derivative(state.im, d);
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (rho[i] < cut || rho[i] == 0.0) continue;
      out[i] = units.hbar * (state.re[i] * dim[i] - state.im[i] * dre[i]) / rho[i];
    }
    comps.emplace_back(g, std::move(out), Quantity::other);
  }
  return VectorField(std::move(comps));
}

ComplexFieldState gaussian_packet(const Grid& g, const Point& center, const Point& sigma, const Point& momentum,
                                  const Units& units) {
  std::vector<cplx> psi(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.position(k);
    double env = 0.0, ph = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const auto sd = static_cast<std::size_t>(d);
      const double z = x[sd] - center[sd];
      env += z * z / (4.0 * sigma[sd] * sigma[sd]);
      ph += momentum[sd] * z / units.hbar;
    }
    psi[k] = std::exp(-env) * cplx(std::cos(ph), std::sin(ph));
  }
  ComplexFieldState st = ComplexFieldState::from_values(g, psi, 0.0);
  const double f = 1.0 / std::sqrt(st.norm());
  return {f * st.re, f * st.im, 0.0};
}

PolarState gaussian_polar(const Grid& g, const Point& center, const Point& sigma, const Point& momentum) {
  const ScalarField r = ScalarField::from_function(g, [&](const Point& x) {
    double env = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const auto sd = static_cast<std::size_t>(d);
      const double z = x[sd] - center[sd];
      env += z * z / (4.0 * sigma[sd] * sigma[sd]);
    }
    return std::exp(-env);
  });
  const ScalarField s = ScalarField::from_function(
      g,
      [&](const Point& x) {
        double ph = 0.0;
        for (int d = 0; d < g.dim(); ++d) {
          const auto sd = static_cast<std::size_t>(d);
          ph += momentum[sd] * (x[sd] - center[sd]);
        }
        return ph;
      },
      Quantity::action);
  return {normalize_density(r), s, 0.0};
}

}  // namespace qbohm
