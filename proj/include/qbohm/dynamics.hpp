#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "qbohm/grid.hpp"
#include "qbohm/units.hpp"

namespace qbohm {

/// Amplitude and action fields at one instant.
struct PolarState {
  ScalarField r;
  ScalarField s;
  double t = 0.0;
};

/// Wavefunction split into real and imaginary parts; used only by the
/// reference integrator and for cross-checks.
struct ComplexFieldState {
  ScalarField re;
  ScalarField im;
  double t = 0.0;

  static ComplexFieldState from_values(const Grid& g, const std::vector<std::complex<double>>& psi, double t);
  std::vector<std::complex<double>> values() const;
  ScalarField density() const;
  double norm() const;
};

struct PolarStepOptions {
  /// Node-free requirement: min R must stay >= node_threshold * max R.
  double node_threshold = 1e-8;
  /// Norm deviation that triggers renormalization.
  double renormalize_above = 1e-12;
};

struct PolarStep {
  PolarState state;
  /// Integral of R^2 minus one before renormalization.
  double norm_drift = 0.0;
  bool renormalized = false;
};

/// Largest dt accepted by step_polar: 0.2 h_min^2 m / hbar.
double polar_step_limit(const Grid& g, const Units& units);

/// One classical Runge-Kutta step of the Hamilton-Jacobi and continuity
/// equations with the Bohmian quantum potential, for a strictly positive R.
/// The continuity equation is advanced for ln(R^2), which is the same equation
/// divided by R^2 and stays smooth in the tails.
PolarStep step_polar(const PolarState& state, const ScalarField& v, double dt, const Units& units = {},
                     const PolarStepOptions& opts = {});

/// Crank-Nicolson time stepping of the Schrodinger equation with Dirichlet
/// boundaries. Boundary values are held at zero.
ComplexFieldState evolve_oracle(const ComplexFieldState& state, const ScalarField& v, double dt, long steps,
                                const Units& units = {});

/// Reusable Crank-Nicolson stepper; factorizes the propagator once.
class CrankNicolson {
 public:
  CrankNicolson(const ScalarField& v, double dt, const Units& units = {});
  ~CrankNicolson();
  CrankNicolson(CrankNicolson&&) noexcept;
  CrankNicolson& operator=(CrankNicolson&&) noexcept;

  ComplexFieldState step(const ComplexFieldState& state) const;
  double dt() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct PolarDecomposition {
  PolarState state;
  /// 1 where |psi| >= mask_threshold * max |psi|.
  std::vector<std::uint8_t> valid;
  /// Connected-component label per point (-1 where masked).
  std::vector<int> component;
  int components = 0;
  /// True when the phase had to be anchored separately on more than one
  /// connected region.
  bool disconnected = false;
};

/// R = |psi|, S = hbar * phase unwrapped by a breadth-first sweep from the grid
/// centre, anchored so S(centre) lies in [0, 2 pi hbar).
PolarDecomposition polar_decompose(const ComplexFieldState& state, const Units& units = {},
                                   double mask_threshold = 1e-10);

/// grad S = hbar Im(grad psi / psi), zero where |psi| < mask_threshold * max |psi|.
VectorField phase_gradient(const ComplexFieldState& state, const Units& units = {},
                           double mask_threshold = 1e-10);

/// Normalized Gaussian packet with position spread sigma (of |psi|^2) and mean momentum.
ComplexFieldState gaussian_packet(const Grid& g, const Point& center, const Point& sigma,
                                  const Point& momentum, const Units& units = {});

/// Polar form of a Gaussian packet: R = |psi|, S = momentum . (x - center).
PolarState gaussian_polar(const Grid& g, const Point& center, const Point& sigma, const Point& momentum);

}  // namespace qbohm
