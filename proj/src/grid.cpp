#include "qbohm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbohm/error.hpp"

namespace qbohm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_grid: return "degenerate-grid";
    case ErrorKind::grid_mismatch: return "grid-mismatch";
    case ErrorKind::non_finite: return "non-finite";
    case ErrorKind::zero_density: return "zero-density";
    case ErrorKind::fully_singular: return "fully-singular";
    case ErrorKind::insufficient_support: return "insufficient-support";
    case ErrorKind::probe_generation: return "probe-generation";
    case ErrorKind::unsupported_ansatz: return "unsupported-ansatz";
    case ErrorKind::step_size: return "step-size";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::node_breakdown: return "node-breakdown";
    case ErrorKind::linear_solve: return "linear-solve";
    case ErrorKind::phase_anchor: return "phase-anchor";
    case ErrorKind::outside_domain: return "outside-domain";
    case ErrorKind::too_few_paths: return "too-few-paths";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

namespace {

void check_axis(const Axis& a, int d) {
  std::ostringstream msg;
  if (!std::isfinite(a.min) || !std::isfinite(a.max) || !(a.max > a.min)) {
    msg << "axis " << d << " needs finite extents with max > min";
    throw Error(ErrorKind::degenerate_grid, msg.str());
  }
  if (a.points < 2) {
    msg << "axis " << d << " needs at least 2 points, got " << a.points;
    throw Error(ErrorKind::degenerate_grid, msg.str());
  }
}

}  // namespace

Grid::Grid(Axis axis0) : dim_(1), axes_{axis0, Axis{0.0, 1.0, 2}}, stride0_(1) {
  check_axis(axis0, 0);
  axes_[1] = Axis{0.0, 0.0, 1};
  size_ = static_cast<std::size_t>(axis0.points);
}

Grid::Grid(Axis axis0, Axis axis1) : dim_(2), axes_{axis0, axis1}, stride0_(axis1.points) {
  check_axis(axis0, 0);
  check_axis(axis1, 1);
  size_ = static_cast<std::size_t>(axis0.points) * static_cast<std::size_t>(axis1.points);
}

double Grid::cell_volume() const {
  double v = spacing(0);
  if (dim_ == 2) v *= spacing(1);
  return v;
}

std::array<int, 2> Grid::multi_index(std::size_t flat) const {
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / static_cast<std::size_t>(stride0_)),
          static_cast<int>(flat % static_cast<std::size_t>(stride0_))};
}

Point Grid::position(std::size_t flat) const {
  auto [i0, i1] = multi_index(flat);
  return {coord(0, i0), dim_ == 2 ? coord(1, i1) : 0.0};
}

Point Grid::center() const {
  return {0.5 * (axes_[0].min + axes_[0].max),
          dim_ == 2 ? 0.5 * (axes_[1].min + axes_[1].max) : 0.0};
}

std::size_t Grid::center_index() const {
  int c0 = (points(0) - 1) / 2;
  int c1 = dim_ == 2 ? (points(1) - 1) / 2 : 0;
  return index(c0, c1);
}

bool Grid::contains(const Point& p) const {
  for (int d = 0; d < dim_; ++d) {
    const Axis& a = axis(d);
    if (!(p[static_cast<std::size_t>(d)] >= a.min && p[static_cast<std::size_t>(d)] <= a.max))
      return false;
  }
  return true;
}

bool Grid::operator==(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int d = 0; d < dim_; ++d)
    if (!(axis(d) == other.axis(d))) return false;
  return true;
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (!(a == b)) throw Error(ErrorKind::grid_mismatch, std::string(context) + ": fields live on different grids");
}

ScalarField::ScalarField(Grid grid, std::vector<double> values, Quantity quantity)
    : grid_(grid), values_(std::move(values)), quantity_(quantity) {
  if (values_.size() != grid_.size()) {
    std::ostringstream msg;
    msg << "field has " << values_.size() << " values for a grid of " << grid_.size() << " points";
    throw Error(ErrorKind::grid_mismatch, msg.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "non-finite value at grid index " << i;
      throw Error(ErrorKind::non_finite, msg.str());
    }
  }
}

ScalarField ScalarField::constant(const Grid& grid, double value, Quantity quantity) {
  return ScalarField(grid, std::vector<double>(grid.size(), value), quantity);
}

ScalarField ScalarField::from_function(const Grid& grid,
                                       const std::function<double(const Point&)>& f,
                                       Quantity quantity) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.position(i));
  return ScalarField(grid, std::move(v), quantity);
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

namespace {

template <typename Op>
ScalarField combine(const ScalarField& a, const ScalarField& b, Op op, const char* ctx) {
  require_same_grid(a.grid(), b.grid(), ctx);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
  return ScalarField(a.grid(), std::move(v), a.quantity());
}

template <typename Op>
ScalarField map(const ScalarField& f, Op op) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(f[i]);
  return ScalarField(f.grid(), std::move(v), f.quantity());
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](double x, double y) { return x + y; }, "field sum");
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](double x, double y) { return x - y; }, "field difference");
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, [](double x, double y) { return x * y; }, "field product");
}
ScalarField operator*(double s, const ScalarField& f) {
  return map(f, [s](double x) { return s * x; });
}
ScalarField operator-(const ScalarField& f) {
  return map(f, [](double x) { return -x; });
}
ScalarField shifted(const ScalarField& f, double c) {
  return map(f, [c](double x) { return x + c; });
}
ScalarField square(const ScalarField& f) {
  return map(f, [](double x) { return x * x; }).with_quantity(Quantity::density);
}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  if (components_.empty())
    throw Error(ErrorKind::invalid_argument, "vector field needs at least one component");
  if (static_cast<int>(components_.size()) != components_.front().grid().dim())
    throw Error(ErrorKind::grid_mismatch, "vector field component count must equal grid dimension");
  for (const auto& c : components_) require_same_grid(c.grid(), components_.front().grid(), "vector field");
}

double VectorField::norm_squared(std::size_t i) const {
  double s = 0.0;
  for (const auto& c : components_) s += c[i] * c[i];
  return s;
}

}  // namespace qbohm
