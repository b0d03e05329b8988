#include "qbohm/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qbohm/error.hpp"
#include "qbohm/field_io.hpp"
#include "qbohm/field_ops.hpp"
#include "qbohm/parallel.hpp"

namespace qbohm {

SnapshotProvider::SnapshotProvider(std::vector<double> times, std::vector<VectorField> gradients)
    : times_(std::move(times)), gradients_(std::move(gradients)) {
  if (times_.empty() || times_.size() != gradients_.size())
    throw Error(ErrorKind::invalid_argument, "snapshot times and gradients must be non-empty and match");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1]))
      throw Error(ErrorKind::invalid_argument, "snapshot times must be strictly increasing");
    require_same_grid(gradients_[0].grid(), gradients_[k].grid(), "snapshot provider");
  }
}

SnapshotProvider SnapshotProvider::stationary(const VectorField& gradient) { return {{0.0}, {gradient}}; }

SnapshotProvider SnapshotProvider::from_actions(std::vector<double> times, const std::vector<ScalarField>& actions) {
  std::vector<VectorField> grads;
  grads.reserve(actions.size());
  for (const ScalarField& s : actions) grads.push_back(gradient(s));
  return {std::move(times), std::move(grads)};
}

namespace {

Point interpolate(const VectorField& v, const Point& x) {
  Point out{0.0, 0.0};
  for (int d = 0; d < v.dim(); ++d) out[static_cast<std::size_t>(d)] = sample(v[d], x);
  return out;
}

template <class Times, class Grads>
Point interpolate_in_time(const Times& times, const Grads& grads, const Point& x, double t) {
  const double slack = 1e-9 * (times.back() - times.front()) + 1e-12 * std::max(1.0, std::abs(t));
  if (t < times.front() - slack || t > times.back() + slack) {
    std::ostringstream msg;
    msg << "t = " << t << " outside the snapshot range [" << times.front() << ", " << times.back() << "]";
    throw Error(ErrorKind::out_of_range, msg.str());
  }
  t = std::clamp(t, times.front(), times.back());
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times.begin());
  if (k >= times.size()) k = times.size() - 1;
  if (k == 0) k = 1;
  const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
  const Point a = interpolate(grads[k - 1], x);
  if (w == 0.0) return a;
  const Point b = interpolate(grads[k], x);
  return {(1.0 - w) * a[0] + w * b[0], (1.0 - w) * a[1] + w * b[1]};
}

}  // namespace

Point SnapshotProvider::gradient_at(const Point& x, double t) const {
  if (!grid().contains(x)) throw Error(ErrorKind::outside_domain, "trajectory point left the grid");
  if (times_.size() == 1) return interpolate(gradients_[0], x);
  return interpolate_in_time(times_, gradients_, x, t);
}

OracleProvider::OracleProvider(ComplexFieldState initial, const ScalarField& v, double dt, const Units& units,
                               double mask_threshold)
    : stepper_(v, dt, units), units_(units), mask_(mask_threshold), state_(std::move(initial)) {
  require_same_grid(state_.re.grid(), v.grid(), "oracle provider");
  t_start_ = state_.t;
  times_.push_back(state_.t);
  gradients_.push_back(phase_gradient(state_, units_, mask_));
}

double OracleProvider::t_max() const { return std::numeric_limits<double>::infinity(); }

void OracleProvider::prepare(double t_from, double t_to) {
  const double slack = 1e-9 * stepper_.dt();
  if (t_from < times_.front() - slack)
    throw Error(ErrorKind::out_of_range, "oracle provider cannot step backwards in time");
  while (times_.back() < t_to - slack) {
    state_ = stepper_.step(state_);
    ++steps_;
    // Times on the oracle grid, free of accumulated rounding.
    state_.t = t_start_ + static_cast<double>(steps_) * stepper_.dt();
    times_.push_back(state_.t);
    gradients_.push_back(phase_gradient(state_, units_, mask_));
  }
  while (times_.size() > 2 && times_[1] <= t_from + slack) {
    times_.pop_front();
    gradients_.pop_front();
  }
}

Point OracleProvider::gradient_at(const Point& x, double t) const {
  if (!grid().contains(x)) throw Error(ErrorKind::outside_domain, "trajectory point left the grid");
  if (times_.size() == 1) {
    if (std::abs(t - times_.front()) > 1e-9 * stepper_.dt())
      throw Error(ErrorKind::out_of_range, "oracle provider not prepared for this time");
    return interpolate(gradients_.front(), x);
  }
  return interpolate_in_time(times_, gradients_, x, t);
}

Point velocity_at(const VectorField& grad_s, const Point& x, const Units& units) {
  Point p = interpolate(grad_s, x);
  for (double& c : p) c /= units.mass;
  return p;
}

Point velocity_at(const ScalarField& s, const Point& x, const Units& units) {
  if (!s.grid().contains(x)) throw Error(ErrorKind::outside_domain, "velocity requested outside the grid");
  return velocity_at(gradient(s), x, units);
}

std::size_t TrajectoryBundle::completed() const {
  return static_cast<std::size_t>(std::count_if(paths.begin(), paths.end(), [](const Path& p) { return !p.exited; }));
}

std::vector<Point> TrajectoryBundle::endpoints() const {
  std::vector<Point> out;
  for (const Path& p : paths)
    if (!p.exited) out.push_back(p.x.back());
  return out;
}

TrajectoryBundle integrate_trajectories(PhaseProvider& provider, const std::vector<Point>& seeds, double t0,
                                        double t1, double dt, const Units& units, const TrajectoryOptions& opts) {
  if (!(dt > 0.0) || !(t1 > t0)) throw Error(ErrorKind::invalid_argument, "need dt > 0 and t1 > t0");
  if (opts.record_every < 1) throw Error(ErrorKind::invalid_argument, "record_every must be >= 1");
  const double slack = 1e-12 * std::max(1.0, t1 - t0);
  if (provider.t_max() > provider.t_min() &&
      (t0 < provider.t_min() - slack || t1 > provider.t_max() + slack))
    throw Error(ErrorKind::out_of_range, "phase provider does not cover the integration interval");

  const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(steps);
  auto time_of = [&](long k) { return k == steps ? t1 : t0 + static_cast<double>(k) * h; };
  auto recorded = [&](long k) { return k % opts.record_every == 0 || k == steps; };

  TrajectoryBundle bundle{provider.grid(), seeds, {}, std::vector<Path>(seeds.size()), h, 1};
  for (long k = 0; k <= steps; ++k)
    if (recorded(k)) bundle.times.push_back(time_of(k));

  const double inv_m = 1.0 / units.mass;
  std::vector<Point> pos = seeds;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Path& path = bundle.paths[i];
    path.t.push_back(t0);
    path.x.push_back(pos[i]);
    if (!provider.grid().contains(pos[i])) {
      path.exited = true;
      path.exit_time = t0;
    }
  }
  auto vel = [&](const Point& p, double t) {
    const Point v = provider.gradient_at(p, t);
    return Point{v[0] * inv_m, v[1] * inv_m};
  };
  const int threads = resolve_threads(opts.threads);
  for (long k = 0; k < steps; ++k) {
    const double t = time_of(k);
    const double tn = time_of(k + 1);
    provider.prepare(t, tn);
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
      Path& path = bundle.paths[i];
      if (path.exited) return;
      Point& x = pos[i];
      try {
        const Point k1 = vel(x, t);
        const Point k2 = vel({x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]}, t + 0.5 * h);
        const Point k3 = vel({x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]}, t + 0.5 * h);
        const Point k4 = vel({x[0] + h * k3[0], x[1] + h * k3[1]}, tn);
        const Point next{x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                         x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
        if (!provider.grid().contains(next)) throw Error(ErrorKind::outside_domain, "left the grid");
        x = next;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::outside_domain) throw;
        path.exited = true;
        path.exit_time = t;
        return;
      }
      if (recorded(k + 1)) {
        path.t.push_back(tn);
        path.x.push_back(x);
      }
    });
  }
  return bundle;
}

std::vector<Point> close_curve(std::vector<Point> pts) {
  if (pts.size() < 3) throw Error(ErrorKind::invalid_argument, "a closed curve needs at least 3 points");
  if (pts.front() != pts.back()) pts.push_back(pts.front());
  return pts;
}

std::vector<Point> circle_curve(const Point& center, double radius, int segments) {
  if (segments < 3) throw Error(ErrorKind::invalid_argument, "circle needs at least 3 segments");
  std::vector<Point> pts;
  for (int k = 0; k < segments; ++k) {
    const double a = 2.0 * std::numbers::pi * k / segments;
    pts.push_back({center[0] + radius * std::cos(a), center[1] + radius * std::sin(a)});
  }
  pts.push_back(pts.front());
  return pts;
}

namespace {

double segment_length(const Point& a, const Point& b) { return std::hypot(b[0] - a[0], b[1] - a[1]); }

// Gradient of the (bi)linear interpolant of s in the cell containing x.
Point interpolant_gradient(const ScalarField& s, const Point& x) {
  const Grid& g = s.grid();
  std::array<int, 2> lo{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int d = 0; d < g.dim(); ++d) {
    const auto sd = static_cast<std::size_t>(d);
    const double u = (x[sd] - g.axis(d).min) / g.spacing(d);
    lo[sd] = std::clamp(static_cast<int>(std::floor(u)), 0, g.points(d) - 2);
    frac[sd] = u - lo[sd];
  }
  if (g.dim() == 1) return {(s.at(lo[0] + 1) - s.at(lo[0])) / g.spacing(0), 0.0};
  const int i = lo[0], j = lo[1];
  const double gx = ((1.0 - frac[1]) * (s.at(i + 1, j) - s.at(i, j)) + frac[1] * (s.at(i + 1, j + 1) - s.at(i, j + 1))) /
                    g.spacing(0);
  const double gy = ((1.0 - frac[0]) * (s.at(i, j + 1) - s.at(i, j)) + frac[0] * (s.at(i + 1, j + 1) - s.at(i + 1, j))) /
                    g.spacing(1);
  return {gx, gy};
}

LoopResult finish_loop(std::vector<Point> curve, double value, double length, const Units& units) {
  if (!std::isfinite(value)) throw Error(ErrorKind::non_finite, "loop integral is not finite");
  return {std::move(curve), value, length, value / units.planck()};
}

}  // namespace

LoopResult loop_integral(const ScalarField& s, const std::vector<Point>& curve_in, const Units& units) {
  const std::vector<Point> curve = close_curve(curve_in);
  const Grid& g = s.grid();
  double h = g.spacing(0);
  if (g.dim() == 2) h = std::min(h, g.spacing(1));
  for (const Point& p : curve)
    if (!g.contains(p)) throw Error(ErrorKind::outside_domain, "loop curve leaves the grid");

  double value = 0.0, length = 0.0;
  std::vector<double> cuts;
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const Point& a = curve[k];
    const Point& b = curve[k + 1];
    const double len = segment_length(a, b);
    if (len > 2.0 * h * (1.0 + 1e-12))
      throw Error(ErrorKind::invalid_argument, "loop segment longer than two grid spacings");
    length += len;
    cuts.assign({0.0, 1.0});
    for (int d = 0; d < g.dim(); ++d) {
      const auto sd = static_cast<std::size_t>(d);
      const double da = b[sd] - a[sd];
      if (da == 0.0) continue;
      const double ua = (a[sd] - g.axis(d).min) / g.spacing(d);
      const double ub = (b[sd] - g.axis(d).min) / g.spacing(d);
      for (int line = static_cast<int>(std::ceil(std::min(ua, ub))); line <= std::floor(std::max(ua, ub)); ++line) {
        const double c = (g.axis(d).coord(line) - a[sd]) / da;
        if (c > 0.0 && c < 1.0) cuts.push_back(c);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double w = cuts[c + 1] - cuts[c];
      if (w <= 0.0) continue;
      const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
      const Point gm = interpolant_gradient(s, {a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])});
      value += w * (gm[0] * (b[0] - a[0]) + gm[1] * (b[1] - a[1]));
    }
  }
  return finish_loop(curve, value, length, units);
}

LoopResult loop_integral(const std::function<Point(const Point&)>& grad_s, const std::vector<Point>& curve_in,
                         double max_segment, const Units& units) {
  if (!(max_segment > 0.0)) throw Error(ErrorKind::invalid_argument, "max_segment must be positive");
  const std::vector<Point> curve = close_curve(curve_in);
  double value = 0.0, length = 0.0;
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const Point& a = curve[k];
    const Point& b = curve[k + 1];
    const double len = segment_length(a, b);
    length += len;
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_segment)));
    for (int q = 0; q < pieces; ++q) {
      const double mid = (q + 0.5) / pieces;
      const Point gm = grad_s({a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])});
      if (!std::isfinite(gm[0]) || !std::isfinite(gm[1]))
        throw Error(ErrorKind::non_finite, "phase gradient undefined on the loop; move the curve off the singularity");
      value += (gm[0] * (b[0] - a[0]) + gm[1] * (b[1] - a[1])) / pieces;
    }
  }
  return finish_loop(curve, value, length, units);
}

Histogram endpoint_histogram(const TrajectoryBundle& bundle, int bins, int axis) {
  if (bins < 1) throw Error(ErrorKind::invalid_argument, "histogram needs at least one bin");
  if (axis < 0 || axis >= bundle.domain.dim()) throw Error(ErrorKind::invalid_argument, "histogram axis out of range");
  const std::vector<Point> ends = bundle.endpoints();
  if (ends.size() < 100) {
    std::ostringstream msg;
    msg << ends.size() << " completed paths; at least 100 are needed";
    throw Error(ErrorKind::too_few_paths, msg.str());
  }
  Histogram hist;
  hist.axis = axis;
  hist.lo = bundle.domain.axis(axis).min;
  hist.hi = bundle.domain.axis(axis).max;
  hist.counts.assign(static_cast<std::size_t>(bins), 0);
  const double w = hist.width();
  for (const Point& p : ends) {
    const int b = std::clamp(static_cast<int>(std::floor((p[static_cast<std::size_t>(axis)] - hist.lo) / w)), 0, bins - 1);
    ++hist.counts[static_cast<std::size_t>(b)];
  }
  hist.total = static_cast<long>(ends.size());
  for (int b = 0; b < bins; ++b) {
    hist.centers.push_back(hist.lo + (b + 0.5) * w);
    hist.density.push_back(static_cast<double>(hist.counts[static_cast<std::size_t>(b)]) /
                           (static_cast<double>(hist.total) * w));
  }
  return hist;
}

std::vector<double> bin_probabilities(const ScalarField& density, const Histogram& hist) {
  const Grid& g = density.grid();
  const int axis = hist.axis;
  if (axis >= g.dim()) throw Error(ErrorKind::invalid_argument, "histogram axis out of range for the density grid");
  const int n = g.points(axis);
  std::vector<double> marginal(static_cast<std::size_t>(n), 0.0);
  if (g.dim() == 1) {
    for (int i = 0; i < n; ++i) marginal[static_cast<std::size_t>(i)] = density[static_cast<std::size_t>(i)];
  } else {
    const int other = 1 - axis;
    const int m = g.points(other);
    const double ho = g.spacing(other);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) {
        const double wgt = (j == 0 || j == m - 1) ? 0.5 * ho : ho;
        acc += wgt * (axis == 0 ? density.at(i, j) : density.at(j, i));
      }
      marginal[static_cast<std::size_t>(i)] = acc;
    }
  }
  const double h = g.spacing(axis);
  const double x0 = g.axis(axis).min;
  std::vector<double> cumulative(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    cumulative[si] = cumulative[si - 1] + 0.5 * h * (marginal[si - 1] + marginal[si]);
  }
  auto cdf = [&](double x) {
    const double u = std::clamp((x - x0) / h, 0.0, static_cast<double>(n - 1));
    const int i = std::min(static_cast<int>(std::floor(u)), n - 2);
    const double f = u - i;
    const auto si = static_cast<std::size_t>(i);
    return cumulative[si] + h * (marginal[si] * f + 0.5 * (marginal[si + 1] - marginal[si]) * f * f);
  };
  const double total = cumulative.back();
  if (!(total > 0.0)) throw Error(ErrorKind::zero_density, "density integrates to zero");
  std::vector<double> out;
  const double w = hist.width();
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    const double lo = hist.lo + static_cast<double>(b) * w;
    out.push_back((cdf(lo + w) - cdf(lo)) / total);
  }
  return out;
}

std::vector<std::size_t> deepest_minima(const std::vector<double>& values, std::size_t count,
                                        double min_peak_fraction) {
  const std::size_t n = values.size();
  if (n < 3) return {};
  const double top = *std::max_element(values.begin(), values.end());
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(values[i] <= values[i - 1] && values[i] <= values[i + 1])) continue;
    if (values[i] == values[i - 1] && values[i] == values[i + 1]) continue;
    std::size_t l = i, r = i;
    while (l > 0 && values[l - 1] >= values[l]) --l;
    while (r + 1 < n && values[r + 1] >= values[r]) ++r;
    const double peak = std::min(values[l], values[r]);
    if (!(peak > 0.0) || peak < min_peak_fraction * top) continue;
    ranked.emplace_back(values[i] / peak, i);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < std::min(count, ranked.size()); ++k) out.push_back(ranked[k].second);
  return out;
}

long crossing_violations(const TrajectoryBundle& bundle) {
  if (bundle.domain.dim() != 1) throw Error(ErrorKind::invalid_argument, "ordering is defined for 1D bundles only");
  std::vector<std::size_t> order(bundle.paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return bundle.seeds[a][0] < bundle.seeds[b][0]; });
  long violations = 0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const Path& a = bundle.paths[order[k]];
    const Path& b = bundle.paths[order[k + 1]];
    if (bundle.seeds[order[k]][0] == bundle.seeds[order[k + 1]][0]) continue;
    const std::size_t samples = std::min(a.x.size(), b.x.size());
    for (std::size_t s = 0; s < samples; ++s)
      if (!(a.x[s][0] < b.x[s][0])) ++violations;
  }
  return violations;
}

void write_bundle_csv(std::ostream& os, const TrajectoryBundle& bundle) {
  const bool two_d = bundle.domain.dim() == 2;
  os << (two_d ? "seed,t,x,y\n" : "seed,t,x\n");
  for (std::size_t i = 0; i < bundle.paths.size(); ++i) {
    const Path& p = bundle.paths[i];
    for (std::size_t k = 0; k < p.t.size(); ++k) {
      os << i << ',' << format_double(p.t[k]) << ',' << format_double(p.x[k][0]);
      if (two_d) os << ',' << format_double(p.x[k][1]);
      os << '\n';
    }
  }
}

void write_histogram_csv(std::ostream& os, const Histogram& hist) {
  os << "center,density\n";
  for (std::size_t b = 0; b < hist.centers.size(); ++b)
    os << format_double(hist.centers[b]) << ',' << format_double(hist.density[b]) << '\n';
}

}  // namespace qbohm
