#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qbohm/dynamics.hpp"
#include "qbohm/eigensolve.hpp"
#include "qbohm/elvariation.hpp"
#include "qbohm/error.hpp"
#include "qbohm/field_ops.hpp"

using namespace qbohm;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

double second_moment_width(const ScalarField& rho) {
  const Grid& g = rho.grid();
  const auto x = ScalarField::from_function(g, [](const Point& p) { return p[0]; });
  const double n = integrate(rho), mean = integrate(x * rho) / n;
  return std::sqrt(integrate(square(shifted(x, -mean)) * rho) / n);
}

PolarState evolve_polar(PolarState st, const ScalarField& v, double t_end, double dt) {
  const long steps = std::lround(t_end / dt);
  const double h = t_end / static_cast<double>(steps);
  for (long k = 0; k < steps; ++k) st = step_polar(st, v, h).state;
  return st;
}

// Sup of |a - b| over the central 80% of a 1D grid.
double central_sup(const ScalarField& a, const ScalarField& b) {
  const Grid& g = a.grid();
  const int n = g.points(0), lo = n / 10, hi = n - 1 - n / 10;
  double worst = 0.0;
  for (int i = lo; i <= hi; ++i) worst = std::max(worst, std::abs(a.at(i) - b.at(i)));
  return worst;
}

}  // namespace

TEST(StepPolar, StationaryGroundState) {
  const Grid g(Axis{-5, 5, 512});
  const auto r = normalize_density(ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] / 2); }));
  const auto v = ScalarField::from_function(g, [](const Point& p) { return p[0] * p[0] / 2; });
  const double dt = polar_step_limit(g, {});
  const PolarStep out = step_polar({r, ScalarField::constant(g, 0.0), 0.0}, v, dt);
  EXPECT_NEAR(out.state.t, dt, 1e-15);
  for (int i = 3; i < g.points(0) - 3; ++i) {
    EXPECT_NEAR(out.state.r.at(i), r.at(i), 1e-6);
    EXPECT_NEAR(out.state.s.at(i), -0.5 * dt, 1e-6);
  }
}

TEST(StepPolar, PlaneWave) {
  const Grid g(Axis{0, 4, 200});
  const double k = 0.8;
  const ScalarField r = normalize_density(ScalarField::constant(g, 1.0));
  const auto s = ScalarField::from_function(g, [&](const Point& p) { return k * p[0]; });
  const double dt = polar_step_limit(g, {});
  const PolarStep out = step_polar({r, s, 0.0}, ScalarField::constant(g, 0.0), dt);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(out.state.r[i], r[i], 1e-12);
    EXPECT_NEAR(out.state.s[i], s[i] - k * k / 2 * dt, 1e-12);
  }
}

TEST(StepPolar, RejectsTooLargeStepAndNodes) {
  const Grid g(Axis{-3, 3, 64});
  const PolarState st = gaussian_polar(g, {0, 0}, {1, 1}, {0, 0});
  const ScalarField v = ScalarField::constant(g, 0.0);
  try {
    (void)step_polar(st, v, 2 * polar_step_limit(g, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::step_size);
  }
  const Grid odd(Axis{-3, 3, 65});
  const auto through_zero = ScalarField::from_function(odd, [](const Point& p) { return std::abs(p[0]); });
  try {
    (void)step_polar({through_zero, ScalarField::constant(odd, 0.0), 0.0}, ScalarField::constant(odd, 0.0),
                     polar_step_limit(odd, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::node_breakdown);
  }
}

TEST(StepPolar, FreeGaussianWidth) {
  const Grid g(Axis{-8.5, 8.5, 512});
  const PolarState st = gaussian_polar(g, {0, 0}, {1, 1}, {0, 0});
  const ScalarField v = ScalarField::constant(g, 0.0);
  const PolarState end = evolve_polar(st, v, 1.0, polar_step_limit(g, {}));
  EXPECT_NEAR(integrate(square(end.r)), 1.0, 1e-6);
  EXPECT_NEAR(second_moment_width(square(end.r)) / std::sqrt(1.25), 1.0, 1e-2);
}

TEST(StepPolar, SelfConvergesInTime) {
  // A smooth packet carries almost no energy in the stiff grid modes, so at
  // the stable step its time error sits at round-off. A rippled amplitude
  // makes the error visible.
  const Grid g(Axis{-8, 8, 160});
  PolarState st = gaussian_polar(g, {0.3, 0}, {1, 1}, {0.5, 0});
  st.r = st.r * ScalarField::from_function(g, [](const Point& p) { return 1.0 + 0.05 * std::sin(25 * p[0]); });
  const auto v = ScalarField::from_function(g, [](const Point& p) { return 0.1 * p[0] * p[0]; });
  const double dt = polar_step_limit(g, {});
  const PolarState a = evolve_polar(st, v, 0.05, dt);
  const PolarState b = evolve_polar(st, v, 0.05, dt / 2);
  const PolarState c = evolve_polar(st, v, 0.05, dt / 4);
  const double e1 = (a.r - b.r).max_abs(), e2 = (b.r - c.r).max_abs();
  ASSERT_GT(e2, 1e-13);
  EXPECT_GE(std::log2(e1 / e2), 1.0) << e1 << " " << e2;
}

TEST(Oracle, ZeroStepsIsIdentity) {
  const Grid g(Axis{-5, 5, 64});
  const ComplexFieldState psi = gaussian_packet(g, {0, 0}, {1, 1}, {1, 0});
  const ComplexFieldState out = evolve_oracle(psi, ScalarField::constant(g, 0.0), 0.01, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(out.re[i], psi.re[i]);
    EXPECT_EQ(out.im[i], psi.im[i]);
  }
}

TEST(Oracle, EigenstateKeepsModulusAndRotatesPhase) {
  const Grid g(Axis{-8, 8, 256});
  const auto v = ScalarField::from_function(g, [](const Point& p) { return p[0] * p[0] / 2; });
  const OracleSpectrum sp = schrodinger_oracle(v, 1);
  const ScalarField& r = sp.eigenvectors[0];
  const ComplexFieldState psi{r, ScalarField::constant(g, 0.0), 0.0};
  const double dt = 0.01;
  const long steps = 100;
  const ComplexFieldState out = evolve_oracle(psi, v, dt, steps);
  // Crank-Nicolson rotates an eigenvector by the Cayley factor exactly.
  const cplx z(0.0, dt / 2 * sp.eigenvalues[0]);
  const double phase = static_cast<double>(steps) * std::arg((1.0 - z) / (1.0 + z));
  EXPECT_NEAR(phase, -sp.eigenvalues[0] * dt * steps, 1e-5);
  const auto vals = out.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(std::abs(vals[i]), std::abs(r[i]), 1e-8);
    if (std::abs(r[i]) > 1e-3) EXPECT_NEAR(std::arg(vals[i] / r[i]), phase, 1e-8);
  }
}

TEST(Oracle, NormIsConservedAndGaussianSpreads) {
  const Grid g(Axis{-12, 12, 1024});
  const ComplexFieldState psi = gaussian_packet(g, {0, 0}, {1, 1}, {0, 0});
  EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
  const ComplexFieldState out = evolve_oracle(psi, ScalarField::constant(g, 0.0), 0.005, 200);
  EXPECT_NEAR(out.norm(), 1.0, 1e-10);
  EXPECT_NEAR(out.t, 1.0, 1e-12);
  EXPECT_NEAR(second_moment_width(out.density()) / std::sqrt(1.25), 1.0, 5e-3);
}

TEST(Oracle, TwoDimensionalNorm) {
  // The packet tails must be negligible at the walls, which are held at zero.
  for (const auto& [n0, n1] : {std::pair{60, 52}, std::pair{52, 60}}) {
    const Grid g(Axis{-9, 9, n0}, Axis{-9, 9, n1});
    const ComplexFieldState psi = gaussian_packet(g, {0.5, -0.5}, {1, 1.2}, {0.4, 0.3});
    const ComplexFieldState out = evolve_oracle(psi, ScalarField::constant(g, 0.0), 0.02, 25);
    EXPECT_NEAR(out.norm(), psi.norm(), 1e-10);
  }
}

TEST(PolarDecompose, PlaneWaveAndRealState) {
  const Grid g(Axis{-4, 4, 400});
  const double k = 1.7;
  std::vector<cplx> psi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, static_cast<int>(i));
    psi[i] = std::exp(-x * x / 8) * std::exp(cplx(0, k * x));
  }
  const PolarDecomposition d = polar_decompose(ComplexFieldState::from_values(g, psi, 0.0));
  EXPECT_FALSE(d.disconnected);
  const ScalarField ds = derivative(d.state.s, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(d.state.r[i], std::abs(psi[i]), 1e-14);
    EXPECT_NEAR(ds[i], k, 1e-3);
  }
  const double s0 = d.state.s[g.center_index()];
  EXPECT_GE(s0, 0.0);
  EXPECT_LT(s0, 2 * kPi);

  const auto real = ComplexFieldState{d.state.r, ScalarField::constant(g, 0.0), 0.0};
  EXPECT_EQ(polar_decompose(real).state.s.max_abs(), 0.0);
}

TEST(PolarDecompose, DisconnectedSupportIsFlagged) {
  const Grid g(Axis{-10, 10, 401});
  std::vector<cplx> psi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, static_cast<int>(i));
    psi[i] = std::exp(-(x - 5) * (x - 5) / 0.1) + std::exp(-(x + 5) * (x + 5) / 0.1) + std::exp(-x * x / 0.1);
    psi[i] *= std::exp(cplx(0, 0.3 * x));
  }
  const PolarDecomposition d = polar_decompose(ComplexFieldState::from_values(g, psi, 0.0));
  EXPECT_TRUE(d.disconnected);
  EXPECT_EQ(d.components, 3);
}

TEST(PolarDecompose, AnchorNeedsSupportAtCenter) {
  const Grid g(Axis{-10, 10, 201});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::exp(-(p[0] - 6) * (p[0] - 6)); });
  try {
    (void)polar_decompose({r, ScalarField::constant(g, 0.0), 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::phase_anchor);
  }
}

TEST(CrossValidation, PolarAgreesWithOracle) {
  const Grid g(Axis{-8.5, 8.5, 512});
  const ScalarField v = ScalarField::constant(g, 0.0);
  const PolarState polar = evolve_polar(gaussian_polar(g, {0, 0}, {1, 1}, {0, 0}), v, 1.0, polar_step_limit(g, {}));
  const ComplexFieldState oracle = evolve_oracle(gaussian_packet(g, {0, 0}, {1, 1}, {0, 0}), v, 0.001, 1000);
  const PolarDecomposition d = polar_decompose(oracle);
  EXPECT_LE(central_sup(polar.r, d.state.r), 1e-2 * polar.r.max());
  const ScalarField gp = derivative(polar.s, 0), go = derivative(d.state.s, 0);
  EXPECT_LE(central_sup(gp, go), 1e-2 * gp.max_abs());
}

TEST(Continuity, GalileanShiftIsAffine) {
  const Grid g(Axis{-5, 5, 300});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] / 3); });
  const auto s = ScalarField::from_function(g, [](const Point& p) { return std::sin(p[0]); });
  const double pshift = 0.7;
  const auto boosted = s + ScalarField::from_function(g, [&](const Point& p) { return pshift * p[0]; });
  const ScalarField diff = stationary_continuity_residual(r, boosted) - stationary_continuity_residual(r, s);
  const ScalarField expected = pshift * derivative(square(r), 0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(diff[i], expected[i], 1e-12);
}
