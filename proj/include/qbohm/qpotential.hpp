#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qbohm/grid.hpp"

namespace qbohm {

/// Candidate quantum potential Q = A R^m |grad R|^n (lap R)^p.
struct AnsatzExponents {
  int m = 0;
  int n = 0;
  int p = 0;
  double A = 0.0;

  /// Rejects non-finite A, and A == 0 unless the zero potential is wanted.
  void validate(bool allow_zero_potential = false) const;
  bool is_constant() const { return m == 0 && n == 0 && p == 0; }
  bool is_bohmian() const { return m == -1 && n == 0 && p == 1; }
  std::array<int, 3> exponents() const { return {m, n, p}; }
  std::string label() const;

  static AnsatzExponents bohmian(double a) { return {-1, 0, 1, a}; }
  static AnsatzExponents constant(double a) { return {0, 0, 0, a}; }
};

/// Relative thresholds (fractions of the field's max magnitude) below which
/// R, |grad R| or lap R count as zero for singularity masking.
struct SingularityThresholds {
  double r = 1e-10;
  double grad = 1e-10;
  double lap = 1e-10;
};

/// Q on the grid with a per-point validity mask. Masked points hold 0.
struct QEvaluation {
  ScalarField q;
  std::vector<std::uint8_t> valid;

  std::size_t valid_count() const;
  double masked_fraction() const;
};

QEvaluation eval_bohmian(const ScalarField& r, double a, double eps_r = 1e-10);
QEvaluation eval_ansatz(const ScalarField& r, const AnsatzExponents& e,
                        const SingularityThresholds& thresholds = {});

/// Closed-form partial derivatives of Q with respect to its arguments R,
/// d_i R and d_i d_j R, evaluated pointwise.
struct AnsatzPartials {
  ScalarField d_r;
  VectorField d_grad;
  /// dim*dim entries, row-major in (i, j).
  std::vector<ScalarField> d_hess;
  std::vector<std::uint8_t> valid;

  const ScalarField& hess(int i, int j) const {
    return d_hess[static_cast<std::size_t>(i * d_grad.dim() + j)];
  }
};

AnsatzPartials ansatz_partials(const ScalarField& r, const AnsatzExponents& e,
                               const SingularityThresholds& thresholds = {});

/// Integer power by repeated multiplication.
double ipow(double x, int k);

}  // namespace qbohm
