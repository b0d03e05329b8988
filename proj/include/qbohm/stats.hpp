#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qbohm/grid.hpp"

namespace qbohm {

/// The one generator type used for all randomness. Its output sequence is
/// fixed by the standard, so seeded runs reproduce across platforms.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);

/// Independent child seed for (stream, attempt), via splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t attempt = 0);

/// Draws `count` positions distributed as the (non-negative) density on its
/// grid by inverse-CDF sampling of the piecewise-linear interpolant. In 2D the
/// axis-0 marginal is sampled first, then the conditional along axis 1.
std::vector<Point> sample_density(const ScalarField& density, std::size_t count, Rng& rng);

struct ChiSquareResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 0.0;
  /// Number of cells after pooling sparse bins.
  int cells = 0;
};

/// Pearson goodness-of-fit of observed counts against expected probabilities.
/// Adjacent bins are pooled left to right until each cell expects at least
/// `min_expected` counts.
ChiSquareResult chi_square_test(std::span<const double> observed,
                                std::span<const double> expected_probability,
                                double min_expected = 5.0);

}  // namespace qbohm
