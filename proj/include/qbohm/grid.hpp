#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qbohm {

/// Position in up to two dimensions; the second component is unused on 1D grids.
using Point = std::array<double, 2>;

struct Axis {
  double min = 0.0;
  double max = 1.0;
  int points = 2;

  double spacing() const { return (max - min) / static_cast<double>(points - 1); }
  double coord(int i) const { return min + static_cast<double>(i) * spacing(); }
  double length() const { return max - min; }

  bool operator==(const Axis&) const = default;
};

/// Uniform tensor-product grid in one or two dimensions. Values on the grid are
/// stored row-major: axis 0 varies slowest.
class Grid {
 public:
  explicit Grid(Axis axis0);
  Grid(Axis axis0, Axis axis1);

  int dim() const { return dim_; }
  const Axis& axis(int d) const { return axes_[static_cast<std::size_t>(d)]; }
  int points(int d) const { return axis(d).points; }
  double spacing(int d) const { return axis(d).spacing(); }
  double coord(int d, int i) const { return axis(d).coord(i); }

  std::size_t size() const { return size_; }
  /// Product of the spacings: the volume of one cell.
  double cell_volume() const;

  std::size_t index(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) * static_cast<std::size_t>(stride0_) +
           static_cast<std::size_t>(i1);
  }
  std::array<int, 2> multi_index(std::size_t flat) const;
  Point position(std::size_t flat) const;
  Point center() const;
  /// Flat index of the grid point nearest the domain center (lower index on ties).
  std::size_t center_index() const;

  bool contains(const Point& p) const;

  bool operator==(const Grid& other) const;

 private:
  int dim_;
  std::array<Axis, 2> axes_;
  std::size_t size_;
  int stride0_;
};

/// Physical meaning of a field's values. Carried along for bookkeeping only.
enum class Quantity { dimensionless, action, energy, density, velocity, other };

/// Real values sampled on a grid. Immutable once built; every public
/// constructor rejects non-finite samples.
class ScalarField {
 public:
  ScalarField(Grid grid, std::vector<double> values, Quantity quantity = Quantity::dimensionless);

  static ScalarField constant(const Grid& grid, double value,
                              Quantity quantity = Quantity::dimensionless);
  static ScalarField from_function(const Grid& grid, const std::function<double(const Point&)>& f,
                                   Quantity quantity = Quantity::dimensionless);

  const Grid& grid() const { return grid_; }
  Quantity quantity() const { return quantity_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(int i0, int i1 = 0) const { return values_[grid_.index(i0, i1)]; }

  double max_abs() const;
  double min() const;
  double max() const;

  ScalarField with_quantity(Quantity q) const { return ScalarField(grid_, values_, q); }

 private:
  Grid grid_;
  std::vector<double> values_;
  Quantity quantity_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& f);
ScalarField operator-(const ScalarField& f);
ScalarField shifted(const ScalarField& f, double c);
ScalarField square(const ScalarField& f);

/// One component per grid axis.
class VectorField {
 public:
  explicit VectorField(std::vector<ScalarField> components);

  const Grid& grid() const { return components_.front().grid(); }
  int dim() const { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int axis) const {
    return components_[static_cast<std::size_t>(axis)];
  }
  /// Euclidean norm squared at one grid point.
  double norm_squared(std::size_t i) const;

 private:
  std::vector<ScalarField> components_;
};

/// Throws grid_mismatch unless the fields share a grid.
void require_same_grid(const Grid& a, const Grid& b, const char* context);

}  // namespace qbohm
