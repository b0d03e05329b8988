#include "qbohm/field_ops.hpp"

#include <cmath>
#include <sstream>

#include "qbohm/error.hpp"

namespace qbohm {

namespace {

void require_points(const Grid& g, int axis, int needed) {
  if (axis < 0 || axis >= g.dim())
    throw Error(ErrorKind::invalid_argument, "axis out of range for grid dimension");
  if (g.points(axis) < needed) {
    std::ostringstream msg;
    msg << "axis " << axis << " has " << g.points(axis) << " points, stencil needs " << needed;
    throw Error(ErrorKind::degenerate_grid, msg.str());
  }
}

// Applies a 1D line operator to every grid line parallel to `axis`.
template <typename LineOp>
ScalarField along_axis(const ScalarField& f, int axis, LineOp op) {
  const Grid& g = f.grid();
  const int n = g.points(axis);
  std::vector<double> out(f.size());
  std::vector<double> line(static_cast<std::size_t>(n));
  std::vector<double> res(static_cast<std::size_t>(n));
  const int other = g.dim() == 2 ? g.points(1 - axis) : 1;
  for (int j = 0; j < other; ++j) {
    for (int i = 0; i < n; ++i) {
      std::size_t k = axis == 0 ? g.index(i, j) : g.index(j, i);
      line[static_cast<std::size_t>(i)] = f[k];
    }
    op(line, res);
    for (int i = 0; i < n; ++i) {
      std::size_t k = axis == 0 ? g.index(i, j) : g.index(j, i);
      out[k] = res[static_cast<std::size_t>(i)];
    }
  }
  return ScalarField(g, std::move(out), Quantity::other);
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis) {
  require_points(f.grid(), axis, 3);
  const double h = f.grid().spacing(axis);
  return along_axis(f, axis, [h](const std::vector<double>& u, std::vector<double>& d) {
    const std::size_t n = u.size();
    const double inv2h = 1.0 / (2.0 * h);
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) * inv2h;
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2h;
  });
}

ScalarField second_derivative(const ScalarField& f, int axis) {
  require_points(f.grid(), axis, 3);
  const double h = f.grid().spacing(axis);
  return along_axis(f, axis, [h](const std::vector<double>& u, std::vector<double>& d) {
    const std::size_t n = u.size();
    const double inv = 1.0 / (h * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv;
    if (n >= 4) {
      d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * inv;
      d[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) * inv;
    } else {
      d[0] = d[1];
      d[n - 1] = d[1];
    }
  });
}

VectorField gradient(const ScalarField& f) {
  std::vector<ScalarField> comps;
  for (int d = 0; d < f.grid().dim(); ++d) comps.push_back(derivative(f, d));
  return VectorField(std::move(comps));
}

ScalarField laplacian(const ScalarField& f) {
  ScalarField acc = second_derivative(f, 0);
  if (f.grid().dim() == 2) acc = acc + second_derivative(f, 1);
  return acc;
}

ScalarField divergence(const VectorField& v) {
  ScalarField acc = derivative(v[0], 0);
  if (v.dim() == 2) acc = acc + derivative(v[1], 1);
  return acc;
}

std::vector<double> quadrature_weights(const Grid& grid) {
  auto axis_weights = [&](int d) {
    const int n = grid.points(d);
    std::vector<double> w(static_cast<std::size_t>(n), grid.spacing(d));
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
  };
  std::vector<double> w0 = axis_weights(0);
  if (grid.dim() == 1) return w0;
  std::vector<double> w1 = axis_weights(1);
  std::vector<double> w(grid.size());
  for (int i = 0; i < grid.points(0); ++i)
    for (int j = 0; j < grid.points(1); ++j)
      w[grid.index(i, j)] = w0[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)];
  return w;
}

double integrate(const ScalarField& f) {
  const std::vector<double> w = quadrature_weights(f.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
  return s;
}

ScalarField normalize_density(const ScalarField& r, double zero_tolerance) {
  const double norm = integrate(square(r));
  if (!(norm > zero_tolerance))
    throw Error(ErrorKind::zero_density, "integral of R^2 vanishes; cannot normalize");
  return (1.0 / std::sqrt(norm) * r).with_quantity(r.quantity());
}

double sample(const ScalarField& f, const Point& p) {
  const Grid& g = f.grid();
  if (!g.contains(p)) throw Error(ErrorKind::outside_domain, "interpolation point outside grid");
  std::array<int, 2> lo{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int d = 0; d < g.dim(); ++d) {
    const auto sd = static_cast<std::size_t>(d);
    const double s = (p[sd] - g.axis(d).min) / g.spacing(d);
    int i = static_cast<int>(std::floor(s));
    if (i >= g.points(d) - 1) i = g.points(d) - 2;
    if (i < 0) i = 0;
    lo[sd] = i;
    frac[sd] = s - i;
  }
  if (g.dim() == 1) return (1.0 - frac[0]) * f.at(lo[0]) + frac[0] * f.at(lo[0] + 1);
  const double a = (1.0 - frac[1]) * f.at(lo[0], lo[1]) + frac[1] * f.at(lo[0], lo[1] + 1);
  const double b = (1.0 - frac[1]) * f.at(lo[0] + 1, lo[1]) + frac[1] * f.at(lo[0] + 1, lo[1] + 1);
  return (1.0 - frac[0]) * a + frac[0] * b;
}

}  // namespace qbohm
