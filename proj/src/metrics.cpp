#include "binreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binreg/errors.hpp"

namespace binreg {

double GridDensity::trapezoid_mass() const {
  double z = 0.0;
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k)
    z += 0.5 * (density[k] + density[k + 1]) * (grid[k + 1] - grid[k]);
  return z;
}

GridDensity GridDensity::normalized() const {
  const double z = trapezoid_mass();
  if (!(z > 0.0)) throw NumericalError("GridDensity: zero mass");
  return {grid, density / z};
}

namespace {
double interp_or_zero(const GridDensity& d, double x) {
  const auto& g = d.grid;
  if (x < g[0] || x > g[g.size() - 1]) return 0.0;
  const auto it = std::lower_bound(g.data(), g.data() + g.size(), x);
  Eigen::Index hi = it - g.data();
  if (hi == 0) return d.density[0];
  const Eigen::Index lo = hi - 1;
  const double t = (x - g[lo]) / (g[hi] - g[lo]);
  return (1.0 - t) * d.density[lo] + t * d.density[hi];
}
}  // namespace

double marginal_accuracy(const GridDensity& q, const GridDensity& ref) {
  if (q.grid.size() < 2 || ref.grid.size() < 2)
    throw ValidationError("marginal_accuracy: need at least 2 grid points");
  if (!(q.grid[q.grid.size() - 1] > q.grid[0]) ||
      !(ref.grid[ref.grid.size() - 1] > ref.grid[0]))
    throw ValidationError("marginal_accuracy: degenerate grid");

  // Merge both grids so kinks of either density land on evaluation nodes.
  std::vector<double> xs(q.grid.data(), q.grid.data() + q.grid.size());
  xs.insert(xs.end(), ref.grid.data(), ref.grid.data() + ref.grid.size());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double l1 = 0.0;
  double prev_x = xs[0];
  double prev_v = std::abs(interp_or_zero(q, prev_x) - interp_or_zero(ref, prev_x));
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const double v = std::abs(interp_or_zero(q, xs[k]) - interp_or_zero(ref, xs[k]));
    l1 += 0.5 * (prev_v + v) * (xs[k] - prev_x);
    prev_x = xs[k];
    prev_v = v;
  }
  return std::clamp(1.0 - 0.5 * l1, 0.0, 1.0);
}

double iris(double mse_m, double cpu_m, double mse_is, double cpu_is) {
  if (!(mse_m > 0.0 && cpu_m > 0.0 && mse_is > 0.0 && cpu_is > 0.0))
    throw ValidationError("iris: all MSE and CPU inputs must be positive");
  return (mse_m / mse_is) * (cpu_is / cpu_m);
}

namespace {

struct WeightedStats {
  double mean, sd, iqr, ess;
};

WeightedStats weighted_stats(const Eigen::VectorXd& v, const Eigen::VectorXd& w_norm) {
  WeightedStats s{};
  s.mean = v.dot(w_norm);
  double var = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    var += w_norm[i] * (v[i] - s.mean) * (v[i] - s.mean);
  s.sd = std::sqrt(var);
  s.ess = 1.0 / w_norm.squaredNorm();

  std::vector<Eigen::Index> order(v.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  auto quantile = [&](double q) {
    double cum = 0.0;
    for (Eigen::Index i : order) {
      cum += w_norm[i];
      if (cum >= q) return v[i];
    }
    return v[order.back()];
  };
  s.iqr = quantile(0.75) - quantile(0.25);
  return s;
}

double silverman_bandwidth(const WeightedStats& s) {
  const double spread = s.iqr > 0.0 ? std::min(s.sd, s.iqr / 1.34) : s.sd;
  return 0.9 * spread * std::pow(s.ess, -0.2);
}

bool is_uniform_grid(const Eigen::VectorXd& g) {
  if (g.size() < 3) return true;
  const double dx = g[1] - g[0];
  for (Eigen::Index k = 1; k + 1 < g.size(); ++k)
    if (std::abs((g[k + 1] - g[k]) - dx) > 1e-9 * std::abs(dx)) return false;
  return true;
}

GridDensity kde_impl(const Eigen::VectorXd& v, const Eigen::VectorXd& w_norm,
                     const Eigen::VectorXd& grid, const WeightedStats& stats) {
  if (!(stats.sd > 0.0)) throw NumericalError("kde: degenerate sample (zero variance)");
  if (stats.ess < 100.0)
    throw ValidationError("kde: fewer than 100 effective samples");
  const double h = silverman_bandwidth(stats);
  GridDensity out;
  out.grid = grid;
  out.density = Eigen::VectorXd::Zero(grid.size());
  const double norm = 1.0 / (h * kSqrtTwoPi);

  if (is_uniform_grid(grid) && grid.size() >= 3) {
    // Linear binning onto the grid, then convolution with the kernel
    // tabulated on bin offsets. O(n + grid * kernel width).
    const double dx = grid[1] - grid[0];
    const Eigen::Index m = grid.size();
    Eigen::VectorXd bins = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double pos = (v[i] - grid[0]) / dx;
      const auto lo = static_cast<Eigen::Index>(std::floor(pos));
      const double frac = pos - lo;
      if (lo >= 0 && lo < m) bins[lo] += w_norm[i] * (1.0 - frac);
      if (lo + 1 >= 0 && lo + 1 < m) bins[lo + 1] += w_norm[i] * frac;
    }
    const auto reach = static_cast<Eigen::Index>(std::ceil(8.0 * h / dx));
    Eigen::VectorXd kernel(reach + 1);
    for (Eigen::Index d = 0; d <= reach; ++d) {
      const double z = d * dx / h;
      kernel[d] = std::exp(-0.5 * z * z);
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      if (bins[k] == 0.0) continue;
      out.density[k] += bins[k] * kernel[0];
      for (Eigen::Index d = 1; d <= reach; ++d) {
        if (k >= d) out.density[k - d] += bins[k] * kernel[d];
        if (k + d < m) out.density[k + d] += bins[k] * kernel[d];
      }
    }
    out.density *= norm;
    return out;
  }

  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double z = (grid[k] - v[i]) / h;
      if (std::abs(z) < 8.0) acc += w_norm[i] * std::exp(-0.5 * z * z);
    }
    out.density[k] = acc * norm;
  }
  return out;
}

Eigen::VectorXd span_grid(const WeightedStats& s, const KdeGridSpec& spec) {
  Eigen::VectorXd grid(spec.points);
  const double lo = s.mean - spec.span * s.sd, hi = s.mean + spec.span * s.sd;
  for (int k = 0; k < spec.points; ++k)
    grid[k] = lo + (hi - lo) * k / (spec.points - 1);
  return grid;
}

}  // namespace

GridDensity kde_density(const Eigen::VectorXd& values, const Eigen::VectorXd& weights,
                        const Eigen::VectorXd& grid) {
  const Eigen::VectorXd w = weights / weights.sum();
  return kde_impl(values, w, grid, weighted_stats(values, w));
}

GridDensity kde_auto_grid(const Eigen::VectorXd& values, const Eigen::VectorXd& weights,
                          const KdeGridSpec& spec) {
  const Eigen::VectorXd w = weights / weights.sum();
  const WeightedStats stats = weighted_stats(values, w);
  if (!(stats.sd > 0.0)) throw NumericalError("kde: degenerate sample (zero variance)");
  return kde_impl(values, w, span_grid(stats, spec), stats);
}

std::vector<GridDensity> kde_marginals(const WeightedSample& ws, const KdeGridSpec& spec) {
  std::vector<GridDensity> out;
  const Eigen::VectorXd w = ws.normalized_weights();
  for (Eigen::Index j = 0; j < ws.points.cols(); ++j) {
    const Eigen::VectorXd col = ws.points.col(j);
    const WeightedStats stats = weighted_stats(col, w);
    if (!(stats.sd > 0.0)) throw NumericalError("kde: degenerate sample (zero variance)");
    out.push_back(kde_impl(col, w, span_grid(stats, spec), stats));
  }
  return out;
}

std::vector<GridDensity> kde_marginals(const ChainTrace& trace, const KdeGridSpec& spec) {
  const auto kept = trace.kept();
  std::vector<GridDensity> out;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(kept.rows(), 1.0 / kept.rows());
  for (Eigen::Index j = 0; j < kept.cols(); ++j) {
    const Eigen::VectorXd col = kept.col(j);
    const WeightedStats stats = weighted_stats(col, w);
    if (!(stats.sd > 0.0)) throw NumericalError("kde: degenerate sample (zero variance)");
    out.push_back(kde_impl(col, w, span_grid(stats, spec), stats));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace binreg
