#include <gtest/gtest.h>

#include <cmath>

#include "qbohm/error.hpp"
#include "qbohm/field_ops.hpp"
#include "qbohm/qpotential.hpp"

using namespace qbohm;

namespace {

ScalarField gaussian_r(const Grid& g) {
  return ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] / 2); });
}

// Q as a plain algebraic function of its arguments. The Hessian enters only
// through its trace.
double q_of(const AnsatzExponents& e, double r, const std::vector<double>& grad, const std::vector<double>& hess) {
  double g2 = 0.0;
  for (double c : grad) g2 += c * c;
  const std::size_t dim = grad.size();
  double lap = 0.0;
  for (std::size_t i = 0; i < dim; ++i) lap += hess[i * dim + i];
  return e.A * std::pow(r, e.m) * std::pow(std::sqrt(g2), e.n) * std::pow(lap, e.p);
}

double central(const std::function<double(double)>& f, double x) {
  const double eps = x != 0.0 ? 1e-6 * std::abs(x) : 1e-9;
  return (f(x + eps) - f(x - eps)) / (2 * eps);
}

bool close_rel(double a, double b, double rel, double floor = 1e-300) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

// Compares the closed-form partials with differences of q_of taken in
// argument space at every unmasked point.
void check_partials(const ScalarField& r, const AnsatzExponents& e, double rel) {
  const Grid& g = r.grid();
  const int dim = g.dim();
  const AnsatzPartials part = ansatz_partials(r, e);
  const VectorField grad = gradient(r);
  const ScalarField lap = laplacian(r);
  long checked = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!part.valid[k]) continue;
    std::vector<double> gv(static_cast<std::size_t>(dim)), hv(static_cast<std::size_t>(dim * dim), 0.0);
    for (int d = 0; d < dim; ++d) gv[static_cast<std::size_t>(d)] = grad[d][k];
    // Split the Laplacian evenly over the diagonal; only the trace matters.
    for (int d = 0; d < dim; ++d) hv[static_cast<std::size_t>(d * dim + d)] = lap[k] / dim;

    const double fd_r = central([&](double x) { return q_of(e, x, gv, hv); }, r[k]);
    ASSERT_TRUE(close_rel(part.d_r[k], fd_r, rel)) << "dQ/dR at " << k << ": " << part.d_r[k] << " vs " << fd_r;
    // A component at round-off beside a large one is compared on the scale of the largest.
    double gfloor = 1e-300;
    for (int d = 0; d < dim; ++d) gfloor = std::max(gfloor, std::abs(part.d_grad[d][k]));
    for (int d = 0; d < dim; ++d) {
      const double fd = central(
          [&](double x) {
            auto v = gv;
            v[static_cast<std::size_t>(d)] = x;
            return q_of(e, r[k], v, hv);
          },
          gv[static_cast<std::size_t>(d)]);
      ASSERT_TRUE(close_rel(part.d_grad[d][k], fd, rel, gfloor)) << "dQ/dgrad at " << k;
    }
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i * dim + j);
        const double fd = central(
            [&](double x) {
              auto v = hv;
              v[idx] = x;
              return q_of(e, r[k], gv, v);
            },
            hv[idx]);
        if (i != j) {
          ASSERT_EQ(part.hess(i, j)[k], 0.0);
          ASSERT_EQ(fd, 0.0);
        } else {
          ASSERT_TRUE(close_rel(part.hess(i, j)[k], fd, rel)) << "dQ/dhess at " << k;
        }
      }
    ++checked;
  }
  EXPECT_GT(checked, static_cast<long>(g.size() / 2));
}

}  // namespace

TEST(EvalBohmian, ConstantRGivesZero) {
  const Grid g(Axis{-1, 1, 16});
  const QEvaluation q = eval_bohmian(ScalarField::constant(g, 2.5), -0.5);
  EXPECT_EQ(q.q.max_abs(), 0.0);
  EXPECT_EQ(q.masked_fraction(), 0.0);
}

TEST(EvalBohmian, GaussianValues) {
  const Grid g(Axis{-8, 8, 512});
  const QEvaluation q = eval_bohmian(gaussian_r(g), -0.5);
  EXPECT_NEAR(sample(q.q, {0.0, 0.0}), 0.5, 1e-3);
  EXPECT_NEAR(sample(q.q, {1.0, 0.0}), 0.0, 1e-3);
  EXPECT_NEAR(sample(q.q, {-1.0, 0.0}), 0.0, 1e-3);
}

TEST(EvalBohmian, LinearRGivesZero) {
  const Grid g(Axis{1, 2, 40});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return p[0]; });
  EXPECT_LE(eval_bohmian(r, 1.0).q.max_abs(), 1e-9);
}

TEST(EvalBohmian, MasksNodesAndFailsWhenEverythingIsMasked) {
  const Grid g(Axis{-1, 1, 21});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return p[0]; });
  const QEvaluation q = eval_bohmian(r, -0.5);
  EXPECT_EQ(q.valid[10], 0);
  EXPECT_EQ(q.valid_count(), 20u);
  try {
    (void)eval_bohmian(ScalarField::constant(g, 0.0), -0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::fully_singular);
  }
}

TEST(EvalBohmian, SignAndScaleInvariant) {
  const Grid g(Axis{-5, 5, 200});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] / 3) * (1.5 + std::sin(p[0])); });
  const QEvaluation a = eval_bohmian(r, -0.5), b = eval_bohmian(-r, -0.5), c = eval_bohmian(7.3 * r, -0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!a.valid[i]) continue;
    EXPECT_EQ(a.q[i], b.q[i]);
    EXPECT_NEAR(c.q[i], a.q[i], 1e-10 * std::max(1.0, std::abs(a.q[i])));
  }
}

TEST(EvalAnsatz, ConstantExponents) {
  const Grid g(Axis{-3, 3, 30});
  const QEvaluation q = eval_ansatz(gaussian_r(g), AnsatzExponents::constant(3.7));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(q.q[i], 3.7);
}

TEST(EvalAnsatz, BohmianFormMatchesEvalBohmian) {
  const Grid g(Axis{-8, 8, 512});
  const ScalarField r = gaussian_r(g);
  const QEvaluation a = eval_ansatz(r, AnsatzExponents::bohmian(-0.5));
  const QEvaluation b = eval_bohmian(r, -0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    EXPECT_NEAR(a.q[i], b.q[i], 1e-12 * std::max(1.0, std::abs(b.q[i])));
  }
}

TEST(EvalAnsatz, GradientSquaredForm) {
  const Grid g(Axis{-8, 8, 512});
  const QEvaluation q = eval_ansatz(gaussian_r(g), {0, 2, 0, 1.0});
  EXPECT_NEAR(sample(q.q, {1.0, 0.0}), std::exp(-1.0), 1e-3);
}

TEST(EvalAnsatz, ScalingCovariance) {
  const Grid g(Axis{-4, 4, 128});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] / 2) + 0.4 * std::exp(-(p[0] - 1.5) * (p[0] - 1.5)); });
  const double c = 2.3;
  for (const AnsatzExponents e : {AnsatzExponents{1, 2, 1, 0.7}, AnsatzExponents{-2, 1, 1, -0.5},
                                  AnsatzExponents{-1, 0, 1, -0.5}, AnsatzExponents{2, -1, 0, 1.0}}) {
    const QEvaluation a = eval_ansatz(r, e), b = eval_ansatz(c * r, e);
    const double factor = std::pow(c, e.m + e.n + e.p);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!a.valid[i] || !b.valid[i]) continue;
      EXPECT_NEAR(b.q[i], factor * a.q[i], 1e-10 * std::abs(factor * a.q[i]) + 1e-300) << e.label();
    }
  }
}

TEST(EvalAnsatz, ZeroCoefficientNeedsPermission) {
  EXPECT_THROW(AnsatzExponents::bohmian(0.0).validate(), Error);
  EXPECT_NO_THROW(AnsatzExponents::bohmian(0.0).validate(true));
}

TEST(AnsatzPartials, ConstantAnsatzHasNoPartials) {
  const Grid g(Axis{-3, 3, 40});
  const AnsatzPartials p = ansatz_partials(gaussian_r(g), AnsatzExponents::constant(2.0));
  EXPECT_EQ(p.d_r.max_abs(), 0.0);
  EXPECT_EQ(p.d_grad[0].max_abs(), 0.0);
  EXPECT_EQ(p.hess(0, 0).max_abs(), 0.0);
}

TEST(AnsatzPartials, BohmianHessianPartialForConstantR) {
  const Grid g(Axis{-1, 1, 12}, Axis{-1, 1, 10});
  const AnsatzPartials p = ansatz_partials(ScalarField::constant(g, 2.0), AnsatzExponents::bohmian(1.0));
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(p.hess(0, 0)[k], 0.5);
    EXPECT_EQ(p.hess(1, 1)[k], 0.5);
    EXPECT_EQ(p.hess(0, 1)[k], 0.0);
    EXPECT_EQ(p.hess(1, 0)[k], 0.0);
  }
}

TEST(AnsatzPartials, MatchArgumentSpaceDifferencesBohmian) {
  check_partials(gaussian_r(Grid(Axis{-8, 8, 512})), AnsatzExponents::bohmian(-0.5), 1e-6);
}

TEST(AnsatzPartials, MatchArgumentSpaceDifferencesGeneral) {
  const Grid g(Axis{-6, 6, 256});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::exp(-(p[0] - 1) * (p[0] - 1) / 2) + 0.7 * std::exp(-(p[0] + 2) * (p[0] + 2) / 3); });
  for (const AnsatzExponents e : {AnsatzExponents{1, 2, -1, 0.3}, AnsatzExponents{-2, 1, 2, -0.5},
                                  AnsatzExponents{0, -2, 1, 1.0}, AnsatzExponents{2, 0, 0, -1.0}})
    check_partials(r, e, 1e-6);
}

TEST(AnsatzPartials, MatchArgumentSpaceDifferences2D) {
  const Grid g(Axis{-3, 3, 41}, Axis{-3, 3, 37});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::exp(-(p[0] * p[0] + 0.5 * p[1] * p[1]) / 2) + 0.2; });
  check_partials(r, AnsatzExponents::bohmian(-0.5), 1e-6);
  check_partials(r, {-1, 2, 1, 0.5}, 1e-6);
}
