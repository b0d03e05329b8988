#pragma once

#include <numbers>

namespace qbohm {

/// Natural units by default (hbar = m = 1).
struct Units {
  double hbar = 1.0;
  double mass = 1.0;

  /// Coefficient of the Bohmian quantum potential, -hbar^2 / 2m.
  double bohm_coefficient() const { return -hbar * hbar / (2.0 * mass); }
  double planck() const { return 2.0 * std::numbers::pi * hbar; }
};

}  // namespace qbohm
