#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qbohm/grid.hpp"
#include "qbohm/qpotential.hpp"
#include "qbohm/units.hpp"

namespace qbohm {

struct ResidualOptions {
  /// Grid points at each boundary excluded from the norms.
  int boundary_margin = 3;
  /// Minimum fraction of unmasked points required to evaluate the condition.
  double min_support = 0.5;
  SingularityThresholds thresholds{};
};

/// Pointwise value of R^2 dQ/dR - d_i(R^2 dQ/d(d_i R)) + d_i d_j(R^2 dQ/d(d_i d_j R))
/// with its three terms kept separately.
struct ConditionResidual {
  ScalarField residual;
  std::array<ScalarField, 3> terms;
  /// Points that are unmasked, whose stencil neighbours are unmasked, and that
  /// lie outside the boundary margin.
  std::vector<std::uint8_t> valid;
  double valid_fraction = 0.0;
  double norm_sup = 0.0;
  double norm_l2 = 0.0;
  /// Largest sup-norm among the three individual terms.
  double term_scale = 0.0;
  /// norm_sup / term_scale (0 when every term vanishes identically).
  double normalized_sup = 0.0;
  double normalized_l2 = 0.0;
};

ConditionResidual condition_residual(const ScalarField& r, const AnsatzExponents& e,
                                     const ResidualOptions& opts = {});

struct ExponentRange {
  int lo = -2;
  int hi = 2;
  int count() const { return hi - lo + 1; }
};

struct ScanBounds {
  ExponentRange m, n, p;
  /// True when every range covers at least [-2, 2].
  bool exhaustive() const;
};

/// One Gaussian bump a * exp(-(x - c)^2 / (2 s^2)), per-axis centre and width.
struct GaussianBump {
  double amplitude = 1.0;
  Point center{0.0, 0.0};
  Point width{1.0, 1.0};
};

struct ProbeDescriptor {
  std::uint64_t seed = 0;
  int attempt = 0;
  std::vector<GaussianBump> bumps;
};

/// Positive, node-free Gaussian mixture sampled on the grid.
ScalarField gaussian_mixture(const Grid& grid, const std::vector<GaussianBump>& bumps);

/// Draws a random mixture for probing. Deterministic in `seed`.
ProbeDescriptor make_probe(const Grid& grid, std::uint64_t seed);

struct ScanOptions {
  int probes = 10;
  std::uint64_t seed = 42;
  double tolerance = 1e-3;
  /// Candidates whose residual falls in [tolerance * band_low, tolerance * band_high]
  /// are re-evaluated on a grid refined by 2x.
  double band_low = 1e-2;
  double band_high = 1e2;
  /// Observed order required to accept a near-threshold candidate as converging.
  double min_order = 1.5;
  double coefficient = -0.5;
  Grid grid = Grid(Axis{-10.0, 10.0, 512});
  ResidualOptions residual{};
  int threads = 0;
};

struct CandidateResult {
  AnsatzExponents exponents;
  std::vector<double> probe_residuals;
  double max_residual = 0.0;
  bool near_threshold = false;
  std::optional<double> refined_residual;
  std::optional<double> observed_order;
  bool solution = false;
};

struct ScanReport {
  ScanBounds bounds;
  int probe_count = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  Grid grid = Grid(Axis{0.0, 1.0, 2});
  std::vector<ProbeDescriptor> probes;
  std::vector<CandidateResult> candidates;
  std::vector<std::array<int, 3>> solutions;
  bool exhaustive = false;

  /// Smallest residual among candidates not classified as solutions.
  double min_nonsolution_residual() const;
};

ScanReport exponent_scan(const ScanBounds& bounds, const ScanOptions& opts = {});

/// Valid-point mask and interior norms shared by the residual helpers below.
struct ResidualField {
  ScalarField values;
  std::vector<std::uint8_t> valid;
  /// sup |values| over valid points outside the boundary margin.
  double sup_interior = 0.0;
  /// sup of (R^2 / max R^2) |values| over the same points.
  double sup_weighted = 0.0;
};

/// (grad S)^2 / 2m + V + Q - lambda, pointwise.
ResidualField hj_residual(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                          double lambda, const AnsatzExponents& e, const Units& units = {},
                          int boundary_margin = 3);
/// Time-dependent form: pass lambda = -dS/dt sampled per point.
ResidualField hj_residual(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                          const ScalarField& lambda, const AnsatzExponents& e,
                          const Units& units = {}, int boundary_margin = 3);

/// div(R^2 grad S / m).
ScalarField stationary_continuity_residual(const ScalarField& r, const ScalarField& s,
                                           const Units& units = {});

}  // namespace qbohm
