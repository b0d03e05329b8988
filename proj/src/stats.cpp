#include "qbohm/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "qbohm/error.hpp"

namespace qbohm {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Cumulative mass of a piecewise-linear density given at nodes with spacing h.
std::vector<double> cumulative(std::span<const double> rho, double h) {
  std::vector<double> c(rho.size(), 0.0);
  for (std::size_t i = 1; i < rho.size(); ++i) c[i] = c[i - 1] + 0.5 * h * (rho[i - 1] + rho[i]);
  return c;
}

// Inverts the cumulative mass at `target` within the piecewise-linear density.
double invert(std::span<const double> rho, const std::vector<double>& cdf, double x0, double h,
              double target) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  std::size_t i = it == cdf.begin() ? 0 : static_cast<std::size_t>(it - cdf.begin()) - 1;
  if (i >= rho.size() - 1) i = rho.size() - 2;
  const double a = rho[i];
  const double b = rho[i + 1];
  const double need = (target - cdf[i]) / h;
  // Solve a s + (b - a) s^2 / 2 = need for s in [0, 1].
  double s;
  const double slope = b - a;
  if (std::abs(slope) < 1e-14 * std::max(a, b)) {
    s = a > 0.0 ? need / a : 0.5;
  } else {
    const double disc = std::max(0.0, a * a + 2.0 * slope * need);
    s = (std::sqrt(disc) - a) / slope;
  }
  s = std::clamp(s, 0.0, 1.0);
  return x0 + (static_cast<double>(i) + s) * h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t attempt) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ (attempt * 0xd1b54a32d192ed03ULL));
}

std::vector<Point> sample_density(const ScalarField& density, std::size_t count, Rng& rng) {
  const Grid& g = density.grid();
  std::vector<double> rho(density.values().begin(), density.values().end());
  for (double& v : rho) v = std::max(v, 0.0);
  std::vector<Point> out;
  out.reserve(count);
  const double h0 = g.spacing(0);
  if (g.dim() == 1) {
    const auto cdf = cumulative(rho, h0);
    if (!(cdf.back() > 0.0)) throw Error(ErrorKind::zero_density, "cannot sample an empty density");
    for (std::size_t k = 0; k < count; ++k)
      out.push_back({invert(rho, cdf, g.axis(0).min, h0, uniform01(rng) * cdf.back()), 0.0});
    return out;
  }
  const int n0 = g.points(0);
  const int n1 = g.points(1);
  const double h1 = g.spacing(1);
  std::vector<double> marginal(static_cast<std::size_t>(n0));
  for (int i = 0; i < n0; ++i) {
    std::span<const double> row(rho.data() + g.index(i, 0), static_cast<std::size_t>(n1));
    marginal[static_cast<std::size_t>(i)] = cumulative(row, h1).back();
  }
  const auto cdf0 = cumulative(marginal, h0);
  if (!(cdf0.back() > 0.0)) throw Error(ErrorKind::zero_density, "cannot sample an empty density");
  std::vector<double> row(static_cast<std::size_t>(n1));
  for (std::size_t k = 0; k < count; ++k) {
    const double x = invert(marginal, cdf0, g.axis(0).min, h0, uniform01(rng) * cdf0.back());
    double s = (x - g.axis(0).min) / h0;
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, n0 - 2);
    const double f = s - i;
    for (int j = 0; j < n1; ++j)
      row[static_cast<std::size_t>(j)] = (1.0 - f) * rho[g.index(i, j)] + f * rho[g.index(i + 1, j)];
    const auto cdf1 = cumulative(row, h1);
    double y = g.center()[1];
    if (cdf1.back() > 0.0) y = invert(row, cdf1, g.axis(1).min, h1, uniform01(rng) * cdf1.back());
    else uniform01(rng);
    out.push_back({x, y});
  }
  return out;
}

ChiSquareResult chi_square_test(std::span<const double> observed,
                                std::span<const double> expected_probability, double min_expected) {
  if (observed.size() != expected_probability.size() || observed.empty())
    throw Error(ErrorKind::invalid_argument, "observed and expected bins differ in length");
  double total = 0.0;
  double psum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    total += observed[i];
    psum += expected_probability[i];
  }
  if (!(total > 0.0) || !(psum > 0.0))
    throw Error(ErrorKind::invalid_argument, "chi-square test needs positive totals");

  std::vector<double> obs_cells, exp_cells;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += expected_probability[i] / psum * total;
    if (e >= min_expected) {
      obs_cells.push_back(o);
      exp_cells.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp_cells.empty()) {
      obs_cells.push_back(o);
      exp_cells.push_back(e);
    } else {
      obs_cells.back() += o;
      exp_cells.back() += e;
    }
  }
  ChiSquareResult r;
  r.cells = static_cast<int>(obs_cells.size());
  for (std::size_t i = 0; i < obs_cells.size(); ++i) {
    const double d = obs_cells[i] - exp_cells[i];
    r.statistic += d * d / exp_cells[i];
  }
  r.degrees_of_freedom = r.cells - 1;
  r.p_value = r.degrees_of_freedom > 0
                  ? boost::math::gamma_q(0.5 * r.degrees_of_freedom, 0.5 * r.statistic)
                  : 1.0;
  return r;
}

}  // namespace qbohm
