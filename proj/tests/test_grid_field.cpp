#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qbohm/error.hpp"
#include "qbohm/field_io.hpp"
#include "qbohm/field_ops.hpp"
#include "qbohm/grid.hpp"

using namespace qbohm;

namespace {

double sup_interior(const ScalarField& a, const std::function<double(double)>& f, int margin = 1) {
  const Grid& g = a.grid();
  double worst = 0.0;
  for (int i = margin; i < g.points(0) - margin; ++i) worst = std::max(worst, std::abs(a.at(i) - f(g.coord(0, i))));
  return worst;
}

}  // namespace

TEST(Grid, CoordinatesAreMinPlusIH) {
  const Grid g(Axis{-1.5, 2.5, 17});
  for (int i = 0; i < 17; ++i) EXPECT_EQ(g.coord(0, i), -1.5 + i * (4.0 / 16.0));
  EXPECT_EQ(g.size(), 17u);
  const Grid g2(Axis{0, 1, 9}, Axis{-2, 2, 11});
  EXPECT_EQ(g2.size(), 99u);
  auto [i, j] = g2.multi_index(g2.index(4, 7));
  EXPECT_EQ(i, 4);
  EXPECT_EQ(j, 7);
}

TEST(ScalarField, RejectsNonFiniteAndWrongLength) {
  const Grid g(Axis{0, 1, 8});
  std::vector<double> v(8, 1.0);
  v[3] = std::nan("");
  EXPECT_THROW(ScalarField(g, v), Error);
  EXPECT_THROW(ScalarField(g, std::vector<double>(7, 1.0)), Error);
}

TEST(ScalarField, MismatchedGridsThrow) {
  const auto a = ScalarField::constant(Grid(Axis{0, 1, 8}), 1.0);
  const auto b = ScalarField::constant(Grid(Axis{0, 1, 9}), 1.0);
  try {
    (void)(a + b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::grid_mismatch);
  }
}

TEST(Gradient, LinearIsExactEverywhere) {
  const Grid g(Axis{0, 1, 64});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return p[0]; });
  const ScalarField d = derivative(f, 0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(d[i], 1.0, 1e-12);
  const ScalarField c = derivative(ScalarField::constant(g, 3.0), 0);
  EXPECT_EQ(c.max_abs(), 0.0);
}

TEST(Gradient, SineAgainstCosine) {
  const Grid g(Axis{0, std::numbers::pi, 256});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return std::sin(p[0]); });
  EXPECT_LE(sup_interior(derivative(f, 0), [](double x) { return std::cos(x); }, 0), 1e-4);
}

TEST(Gradient, TooFewPointsIsDegenerate) {
  const Grid g(Axis{0, 1, 2});
  try {
    (void)gradient(ScalarField::constant(g, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_grid);
  }
}

TEST(Laplacian, QuadraticAndLinear) {
  const Grid g(Axis{-3, 2, 40});
  const auto q = ScalarField::from_function(g, [](const Point& p) { return p[0] * p[0]; });
  const auto l = ScalarField::from_function(g, [](const Point& p) { return 2.5 * p[0] - 1.0; });
  EXPECT_LE(sup_interior(laplacian(q), [](double) { return 2.0; }, 0), 1e-9);
  EXPECT_LE(sup_interior(laplacian(l), [](double) { return 0.0; }, 0), 1e-9);
}

TEST(Laplacian, GaussianSecondDerivative) {
  const Grid g(Axis{-8, 8, 512});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] / 2); });
  EXPECT_LE(sup_interior(laplacian(f), [](double x) { return (x * x - 1) * std::exp(-x * x / 2); }), 1e-3);
}

TEST(Laplacian, TwoDimensionalQuadratic) {
  const Grid g(Axis{-1, 1, 21}, Axis{0, 3, 31});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return p[0] * p[0] + 3 * p[1] * p[1] + p[0] * p[1]; });
  const ScalarField l = laplacian(f);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(l[k], 8.0, 1e-8);
}

TEST(Operators, AreLinear) {
  const Grid g(Axis{-2, 2, 33}, Axis{-1, 1, 17});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return std::sin(p[0]) * std::exp(p[1]); });
  const auto h = ScalarField::from_function(g, [](const Point& p) { return p[0] * p[1] * p[1] + std::cos(3 * p[1]); });
  const double a = 1.7, b = -0.3;
  const ScalarField comb = a * f + b * h;
  const ScalarField lhs = laplacian(comb), rhs = a * laplacian(f) + b * laplacian(h);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(lhs[k], rhs[k], 1e-10 * (1 + std::abs(rhs[k])));
  const VectorField gl = gradient(comb), gf = gradient(f), gh = gradient(h);
  for (int d = 0; d < 2; ++d)
    for (std::size_t k = 0; k < g.size(); ++k)
      EXPECT_NEAR(gl[d][k], a * gf[d][k] + b * gh[d][k], 1e-11 * (1 + std::abs(gl[d][k])));
}

TEST(Operators, LaplacianMatchesDivergenceOfGradient) {
  const Grid g(Axis{0, 2 * std::numbers::pi, 200});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return std::sin(p[0]); });
  const ScalarField a = laplacian(f), b = divergence(gradient(f));
  const double h = g.spacing(0);
  double worst = 0.0;
  for (int i = 2; i < g.points(0) - 2; ++i) worst = std::max(worst, std::abs(a.at(i) - b.at(i)));
  EXPECT_LE(worst, 10 * h * h);
}

TEST(Integrate, ConstantsAndGaussian) {
  EXPECT_DOUBLE_EQ(integrate(ScalarField::constant(Grid(Axis{0, 1, 50}), 1.0)), 1.0);
  EXPECT_EQ(integrate(ScalarField::constant(Grid(Axis{0, 1, 50}), 0.0)), 0.0);
  const Grid g(Axis{-6, 6, 512});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0]); });
  EXPECT_NEAR(integrate(f) / std::sqrt(std::numbers::pi), 1.0, 1e-6);
}

TEST(Integrate, TwoDimensionalSeparable) {
  const Grid g(Axis{-6, 6, 201}, Axis{-5, 5, 151});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] - p[1] * p[1]); });
  EXPECT_NEAR(integrate(f), std::numbers::pi, 1e-6);
}

TEST(Integrate, ReflectionInvariantForSymmetricField) {
  const Grid g(Axis{-3, 3, 101});
  std::vector<double> v(g.size()), r(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, static_cast<int>(i));
    v[i] = std::cosh(x) / (1 + x * x);
  }
  for (std::size_t i = 0; i < g.size(); ++i) r[i] = v[g.size() - 1 - i];
  EXPECT_EQ(integrate(ScalarField(g, v)), integrate(ScalarField(g, r)));
}

TEST(NormalizeDensity, Examples) {
  const auto two = normalize_density(ScalarField::constant(Grid(Axis{0, 1, 20}), 2.0));
  for (std::size_t i = 0; i < two.size(); ++i) EXPECT_NEAR(two[i], 1.0, 1e-15);

  const Grid g(Axis{-8, 8, 512});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::exp(-p[0] * p[0] / 2); });
  const ScalarField n1 = normalize_density(r);
  EXPECT_NEAR(integrate(square(n1)), 1.0, 1e-12);
  const ScalarField n2 = normalize_density(n1);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(n2[i], n1[i], 1e-12);
}

TEST(NormalizeDensity, KeepsSignAndRejectsZero) {
  const Grid g(Axis{0, 1, 30});
  const auto r = ScalarField::from_function(g, [](const Point& p) { return std::sin(2 * std::numbers::pi * p[0]); });
  const ScalarField n = normalize_density(r);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_TRUE(n[i] * r[i] >= 0.0);
  try {
    (void)normalize_density(ScalarField::constant(g, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_density);
  }
}

TEST(Sample, BilinearIsExactOnBilinear) {
  const Grid g(Axis{0, 1, 11}, Axis{-1, 1, 7});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return 1 + 2 * p[0] - p[1] + 3 * p[0] * p[1]; });
  const Point x{0.537, -0.211};
  EXPECT_NEAR(sample(f, x), 1 + 2 * x[0] - x[1] + 3 * x[0] * x[1], 1e-13);
  EXPECT_THROW(sample(f, {1.2, 0.0}), Error);
}

TEST(FieldIo, RoundTripIsLossless) {
  const Grid g(Axis{-1.1, 2.3, 13}, Axis{0.1, 0.7, 5});
  const auto f = ScalarField::from_function(g, [](const Point& p) { return std::exp(p[0]) / 3.0 + 1e-17 * p[1]; });
  std::stringstream ss;
  write_field_csv(ss, f);
  const ScalarField back = read_field_csv(ss);
  ASSERT_TRUE(back.grid() == g);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(back[k], f[k]);
  EXPECT_EQ(grid_header(g).rfind("# grid: dim=2 axis0=", 0), 0u);
}
