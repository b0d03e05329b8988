#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <vector>

#include "qbohm/dynamics.hpp"
#include "qbohm/grid.hpp"
#include "qbohm/units.hpp"

namespace qbohm {

/// Source of grad S at (x, t) for the guidance law.
class PhaseProvider {
 public:
  virtual ~PhaseProvider() = default;
  virtual const Grid& grid() const = 0;
  virtual double t_min() const = 0;
  virtual double t_max() const = 0;
  /// Throws outside_domain when x is off the grid, out_of_range when t is
  /// outside [t_min, t_max].
  virtual Point gradient_at(const Point& x, double t) const = 0;
  /// Called before each integration step with the step's time interval.
  virtual void prepare(double /*t_from*/, double /*t_to*/) {}
};

/// grad S snapshots at increasing times, interpolated (bi)linearly in space
/// and linearly in time. A single snapshot is treated as time independent.
class SnapshotProvider final : public PhaseProvider {
 public:
  SnapshotProvider(std::vector<double> times, std::vector<VectorField> gradients);
  static SnapshotProvider stationary(const VectorField& gradient);
  /// Gradients of action fields by the grid stencils.
  static SnapshotProvider from_actions(std::vector<double> times, const std::vector<ScalarField>& actions);

  const Grid& grid() const override { return gradients_.front().grid(); }
  double t_min() const override { return times_.front(); }
  double t_max() const override { return times_.back(); }
  Point gradient_at(const Point& x, double t) const override;
  std::size_t snapshots() const { return times_.size(); }

 private:
  std::vector<double> times_;
  std::vector<VectorField> gradients_;
};

/// Streams grad S = hbar Im(grad psi / psi) from a Crank-Nicolson evolution
/// as the integration advances, keeping only the snapshots the current step
/// needs. Time can only move forward.
class OracleProvider final : public PhaseProvider {
 public:
  OracleProvider(ComplexFieldState initial, const ScalarField& v, double dt, const Units& units = {},
                 double mask_threshold = 1e-10);

  const Grid& grid() const override { return state_.re.grid(); }
  double t_min() const override { return times_.front(); }
  double t_max() const override;
  Point gradient_at(const Point& x, double t) const override;
  void prepare(double t_from, double t_to) override;
  /// Latest oracle state.
  const ComplexFieldState& state() const { return state_; }
  long steps_taken() const { return steps_; }

 private:
  CrankNicolson stepper_;
  Units units_;
  double mask_;
  ComplexFieldState state_;
  std::deque<double> times_;
  std::deque<VectorField> gradients_;
  double t_start_ = 0.0;
  long steps_ = 0;
};

/// grad S / m at x, by (bi)linear interpolation of the stencil gradient.
Point velocity_at(const ScalarField& s, const Point& x, const Units& units = {});
Point velocity_at(const VectorField& grad_s, const Point& x, const Units& units = {});

struct Path {
  std::vector<double> t;
  std::vector<Point> x;
  bool exited = false;
  /// Time of the last in-domain sample when exited.
  double exit_time = 0.0;
};

struct TrajectoryBundle {
  Grid domain;
  std::vector<Point> seeds;
  /// Nominal sample instants; an exited path holds a prefix of them.
  std::vector<double> times;
  std::vector<Path> paths;
  double dt = 0.0;
  /// Order of the spatial interpolation of grad S (1 = (bi)linear).
  int interpolation_order = 1;
  std::size_t completed() const;
  /// Final positions of the paths that stayed inside the domain, in seed order.
  std::vector<Point> endpoints() const;
};

struct TrajectoryOptions {
  /// Keep every k-th step in the recorded path; the end point is always kept.
  int record_every = 1;
  int threads = 0;
};

/// Classical RK4 integration of dx/dt = grad S / m from t0 to t1. The step is
/// shrunk so that a whole number of steps lands on t1.
TrajectoryBundle integrate_trajectories(PhaseProvider& provider, const std::vector<Point>& seeds, double t0,
                                        double t1, double dt, const Units& units = {},
                                        const TrajectoryOptions& opts = {});

struct LoopResult {
  std::vector<Point> curve;
  double value = 0.0;
  double length = 0.0;
  /// value / (2 pi hbar); reported, never rounded or enforced.
  double n_est = 0.0;
};

/// Closed polyline through the given points (the first point is appended if
/// the curve is open).
std::vector<Point> close_curve(std::vector<Point> pts);
std::vector<Point> circle_curve(const Point& center, double radius, int segments);

/// Loop integral of grad S on a grid-stored S. Each segment is split at cell
/// faces and the midpoint rule is applied to the gradient of the (bi)linear
/// interpolant of S, which is exact for it. Segments must not exceed 2h.
LoopResult loop_integral(const ScalarField& s, const std::vector<Point>& curve, const Units& units = {});
/// Loop integral of an analytic grad S by the composite midpoint rule; every
/// segment is subdivided to at most max_segment.
LoopResult loop_integral(const std::function<Point(const Point&)>& grad_s, const std::vector<Point>& curve,
                         double max_segment, const Units& units = {});

struct Histogram {
  int axis = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> centers;
  std::vector<long> counts;
  /// counts / (total * bin width).
  std::vector<double> density;
  long total = 0;
  double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Histogram of completed endpoints along `axis`, bins spanning the domain
/// extent. Needs at least 100 completed paths.
Histogram endpoint_histogram(const TrajectoryBundle& bundle, int bins, int axis = 0);
/// Probability mass of each histogram bin under the marginal of `density`
/// along the histogram axis (piecewise-linear marginal, integrated exactly).
std::vector<double> bin_probabilities(const ScalarField& density, const Histogram& hist);

/// Local minima of a binned distribution ranked by contrast: the bin value over
/// the smaller of the two enclosing maxima. Minima whose smaller enclosing
/// maximum is below min_peak_fraction of the largest bin are ignored, so tail
/// bins with no fringe structure do not count. Returns up to `count` indices.
std::vector<std::size_t> deepest_minima(const std::vector<double>& values, std::size_t count,
                                        double min_peak_fraction = 0.01);

/// Number of (pair, sample) violations of strict ordering among 1D paths that
/// start ordered; exited paths are compared only while both are inside.
long crossing_violations(const TrajectoryBundle& bundle);

void write_bundle_csv(std::ostream& os, const TrajectoryBundle& bundle);
void write_histogram_csv(std::ostream& os, const Histogram& hist);

}  // namespace qbohm
