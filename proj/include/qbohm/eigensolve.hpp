#pragma once

#include <optional>
#include <vector>

#include "qbohm/grid.hpp"
#include "qbohm/qpotential.hpp"
#include "qbohm/units.hpp"

namespace qbohm {

struct EnergyBreakdown {
  /// Integral of R^2 (grad S)^2 / 2m.
  double flow = 0.0;
  /// Integral of R^2 V.
  double external = 0.0;
  /// Integral of R^2 Q.
  double quantum = 0.0;

  double total() const { return flow + external + quantum; }
};

struct RayleighResult {
  double lambda = 0.0;
  EnergyBreakdown breakdown;
  /// Set when R arrived with a norm off by more than 1e-8 and was rescaled.
  bool renormalized = false;
};

/// Energy functional of a normalized R. For the Bohmian ansatz the quantum term
/// is the integrated-by-parts form -A * sum over grid edges of (dR/h)^2, which is
/// the quadratic form of the discrete Dirichlet Laplacian. Other ansatz forms
/// integrate R^2 Q pointwise.
RayleighResult rayleigh_terms(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                              const AnsatzExponents& e, const Units& units = {});
double rayleigh_lambda(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                       const AnsatzExponents& e, const Units& units = {});

/// Coordinate gradient of rayleigh_lambda with respect to the interior values of R
/// (boundary entries are zero): 2 w_i (H R - lambda R)_i / integral(R^2).
ScalarField energy_gradient(const ScalarField& r, const ScalarField& s, const ScalarField& v,
                            const AnsatzExponents& e, const Units& units = {});

struct SolverOptions {
  double tol_grad = 1e-8;
  long max_iterations = 50000;
  /// Relaxation step; defaults to 0.4 h_min^2 m / hbar^2.
  std::optional<double> step;
  /// Consecutive steps with lambda above its best value that count as divergence.
  int divergence_window = 100;
  /// Step halvings allowed before giving up with a step-size error.
  int max_step_halvings = 8;
  bool record_trace = false;
  /// Fixed phase field; defaults to S = 0.
  std::optional<ScalarField> phase;
  /// Starting guess; defaults to the lowest Dirichlet mode of the box.
  std::optional<ScalarField> initial;
};

struct EnergyReport {
  ScalarField r_opt;
  double lambda = 0.0;
  EnergyBreakdown breakdown;
  long iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  double step = 0.0;
  int step_halvings = 0;
  /// Lambda after each accepted iteration (only with record_trace).
  std::vector<double> lambda_trace;
};

/// Minimizes the energy functional over normalized R with Dirichlet boundaries by
/// projected gradient descent R <- R - tau (H R - lambda R), renormalizing each
/// step. Supports the Bohmian and the constant ansatz.
EnergyReport minimize_energy(const ScalarField& v, const AnsatzExponents& e, const Units& units = {},
                             const SolverOptions& opts = {});

struct OracleSpectrum {
  std::vector<double> eigenvalues;
  /// Normalized under the trapezoidal rule, zero on the boundary, value at the
  /// grid centre (or first extremum) non-negative.
  std::vector<ScalarField> eigenvectors;
};

/// Lowest k eigenpairs of -(hbar^2/2m) lap + V with Dirichlet boundaries, from a
/// separately assembled matrix: symmetric tridiagonal QR in 1D, shift-invert
/// Lanczos on the sparse 5-point matrix in 2D.
OracleSpectrum schrodinger_oracle(const ScalarField& v, int k, const Units& units = {});

/// Flips the sign of R so that the value at the grid centre is non-negative; if
/// that value is zero, the first extremum (lowest index) decides.
ScalarField fix_sign(const ScalarField& r);

}  // namespace qbohm
