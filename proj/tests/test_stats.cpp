#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "qbohm/error.hpp"
#include "qbohm/stats.hpp"

using namespace qbohm;

TEST(ChiSquare, PerfectFitHasUnitPValue) {
  const std::vector<double> obs{25, 25, 25, 25}, p{0.25, 0.25, 0.25, 0.25};
  const ChiSquareResult r = chi_square_test(obs, p);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.degrees_of_freedom, 3);
  EXPECT_NEAR(r.p_value, 1.0, 1e-15);
}

TEST(ChiSquare, OneDegreeOfFreedomMatchesErfc) {
  const std::vector<double> obs{60, 40}, p{0.5, 0.5};
  const ChiSquareResult r = chi_square_test(obs, p);
  EXPECT_NEAR(r.statistic, 4.0, 1e-12);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(2.0)), 1e-12);
}

TEST(ChiSquare, TwoDegreesOfFreedomMatchesExponential) {
  const std::vector<double> obs{30, 50, 20}, p{1.0, 1.0, 1.0};
  const ChiSquareResult r = chi_square_test(obs, p);
  const double e = 100.0 / 3;
  const double stat = ((30 - e) * (30 - e) + (50 - e) * (50 - e) + (20 - e) * (20 - e)) / e;
  EXPECT_NEAR(r.statistic, stat, 1e-12);
  EXPECT_NEAR(r.p_value, std::exp(-stat / 2), 1e-12);
}

TEST(ChiSquare, SparseBinsArePooled) {
  const std::vector<double> obs{1, 0, 2, 47, 50}, p{0.01, 0.01, 0.02, 0.46, 0.5};
  const ChiSquareResult r = chi_square_test(obs, p);
  EXPECT_EQ(r.cells, 2);
  EXPECT_EQ(r.degrees_of_freedom, 1);
  const std::vector<double> bad{1, 2};
  EXPECT_THROW(chi_square_test(bad, p), Error);
}

TEST(Sampling, GaussianMoments) {
  const Grid g(Axis{-8, 8, 801});
  const auto rho = ScalarField::from_function(g, [](const Point& p) { return std::exp(-(p[0] - 0.5) * (p[0] - 0.5) / 2); });
  Rng rng(11);
  const auto pts = sample_density(rho, 40000, rng);
  double mean = 0.0, var = 0.0;
  for (const Point& p : pts) mean += p[0];
  mean /= static_cast<double>(pts.size());
  for (const Point& p : pts) var += (p[0] - mean) * (p[0] - mean);
  var /= static_cast<double>(pts.size() - 1);
  EXPECT_NEAR(mean, 0.5, 0.02);
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Sampling, TwoDimensionalStaysInSupport) {
  const Grid g(Axis{-2, 2, 41}, Axis{-2, 2, 41});
  const auto rho = ScalarField::from_function(g, [](const Point& p) { return p[1] > 0.5 ? 1.0 : 0.0; });
  Rng rng(4);
  for (const Point& p : sample_density(rho, 500, rng)) EXPECT_GE(p[1], 0.4);
}

TEST(Sampling, EmptyDensityThrows) {
  const Grid g(Axis{0, 1, 10});
  Rng rng(1);
  try {
    (void)sample_density(ScalarField::constant(g, 0.0), 3, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_density);
  }
}

TEST(Seeds, DeterministicAndDistinct) {
  EXPECT_EQ(derive_seed(42, 3, 1), derive_seed(42, 3, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (std::uint64_t a = 0; a < 4; ++a) seen.insert(derive_seed(42, s, a));
  EXPECT_EQ(seen.size(), 200u);
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
