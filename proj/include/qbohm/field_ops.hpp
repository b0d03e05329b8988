#pragma once

#include <vector>

#include "qbohm/grid.hpp"

namespace qbohm {

/// First derivative along one axis: central differences in the interior and
/// second-order one-sided differences at the two ends. Needs >= 3 points.
ScalarField derivative(const ScalarField& f, int axis);

/// Second derivative along one axis. Interior 3-point stencil; the ends use the
/// second-order 4-point one-sided stencil (3-point when the axis has 3 points).
ScalarField second_derivative(const ScalarField& f, int axis);

VectorField gradient(const ScalarField& f);
/// 3-point (1D) or 5-point (2D) Laplacian, one-sided at the boundary.
ScalarField laplacian(const ScalarField& f);
ScalarField divergence(const VectorField& v);

/// Trapezoidal weights (tensor product in 2D); integrate(f) = sum w_i f_i.
std::vector<double> quadrature_weights(const Grid& grid);

/// Trapezoidal rule over the whole grid, summed in storage order.
double integrate(const ScalarField& f);

/// R / sqrt(integral of R^2). Negative values of R are kept.
ScalarField normalize_density(const ScalarField& r, double zero_tolerance = 1e-300);

/// Linear (1D) or bilinear (2D) interpolation. Throws outside_domain.
double sample(const ScalarField& f, const Point& p);

}  // namespace qbohm
