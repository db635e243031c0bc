#pragma once

// Test-only reference computations, kept independent of the library's own
// numerical paths: finite differences, adaptive Simpson quadrature, and
// dense tensor-grid integration of low-dimensional posteriors.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "binreg/model.hpp"
#include "binreg/synth.hpp"

namespace oracles {

using Fn = std::function<double(const Eigen::VectorXd&)>;

inline Eigen::VectorXd fd_gradient(const Fn& f, const Eigen::VectorXd& x,
                                   double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const Fn& f, const Eigen::VectorXd& x,
                                  double h = 1e-4) {
  const Eigen::Index p = x.size();
  Eigen::MatrixXd hess(p, p);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      if (i == j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
      } else {
        Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h; xpp[j] += h;
        xpm[i] += h; xpm[j] -= h;
        xmp[i] -= h; xmp[j] += h;
        xmm[i] -= h; xmm[j] -= h;
        hess(i, j) = hess(j, i) =
            (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
      }
    }
  }
  return hess;
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb, double whole, double tol,
                      int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson integral of f over [a,b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int depth = 28) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Dense tensor-grid summary of a 1- or 2-dimensional posterior: evidence,
/// moments, and per-component marginals on the quadrature grid.
struct QuadPosterior {
  double log_evidence = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::vector<Eigen::VectorXd> marginal_grid;
  std::vector<Eigen::VectorXd> marginal_density;  // normalized
};

inline QuadPosterior quad_posterior(const binreg::PosteriorTarget& t,
                                    double half_width = 8.0, int nodes = 601) {
  const Eigen::Index p = t.dim();
  if (p < 1 || p > 2) throw std::invalid_argument("quad oracle handles p <= 2 only");

  // Locate the mode by coarse-to-fine grid search, independent of Newton.
  Eigen::VectorXd center = Eigen::VectorXd::Zero(p);
  double width = 12.0;
  for (int pass = 0; pass < 4; ++pass) {
    const int g = 41;
    Eigen::VectorXd best = center;
    double best_lp = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd x(p);
    if (p == 1) {
      for (int i = 0; i < g; ++i) {
        x[0] = center[0] + width * (2.0 * i / (g - 1) - 1.0);
        const double lp = t.log_posterior(x);
        if (lp > best_lp) { best_lp = lp; best = x; }
      }
    } else {
      for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
          x[0] = center[0] + width * (2.0 * i / (g - 1) - 1.0);
          x[1] = center[1] + width * (2.0 * j / (g - 1) - 1.0);
          const double lp = t.log_posterior(x);
          if (lp > best_lp) { best_lp = lp; best = x; }
        }
    }
    center = best;
    width *= 0.15;
  }

  // Estimate scale from the curvature of a 1-D slice, then integrate on a
  // wide uniform grid around the located mode.
  Eigen::VectorXd scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double h = 1e-3;
    Eigen::VectorXd xp = center, xm = center;
    xp[j] += h;
    xm[j] -= h;
    const double d2 =
        (t.log_posterior(xp) - 2.0 * t.log_posterior(center) + t.log_posterior(xm)) /
        (h * h);
    scale[j] = d2 < 0.0 ? 1.0 / std::sqrt(-d2) : 1.0;
  }

  QuadPosterior out;
  if (p == 1) {
    const double lo = center[0] - half_width * scale[0];
    const double hi = center[0] + half_width * scale[0];
    Eigen::VectorXd grid(nodes), lp(nodes);
    for (int i = 0; i < nodes; ++i) {
      grid[i] = lo + (hi - lo) * i / (nodes - 1);
      Eigen::VectorXd x(1);
      x[0] = grid[i];
      lp[i] = t.log_posterior(x);
    }
    const double lmax = lp.maxCoeff();
    const Eigen::VectorXd f = (lp.array() - lmax).exp();
    const double dx = (hi - lo) / (nodes - 1);
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < nodes; ++i) {
      const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
      z += w * f[i];
      m1 += w * f[i] * grid[i];
      m2 += w * f[i] * grid[i] * grid[i];
    }
    out.log_evidence = lmax + std::log(z * dx);
    out.mean = Eigen::VectorXd::Constant(1, m1 / z);
    out.variance = Eigen::VectorXd::Constant(1, m2 / z - (m1 / z) * (m1 / z));
    out.marginal_grid.push_back(grid);
    out.marginal_density.push_back(f / (z * dx));
    return out;
  }

  Eigen::VectorXd g0(nodes), g1(nodes);
  for (int i = 0; i < nodes; ++i) {
    g0[i] = center[0] + half_width * scale[0] * (2.0 * i / (nodes - 1) - 1.0);
    g1[i] = center[1] + half_width * scale[1] * (2.0 * i / (nodes - 1) - 1.0);
  }
  Eigen::MatrixXd lp(nodes, nodes);
  Eigen::VectorXd x(2);
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j) {
      x[0] = g0[i];
      x[1] = g1[j];
      lp(i, j) = t.log_posterior(x);
    }
  const double lmax = lp.maxCoeff();
  const Eigen::MatrixXd f = (lp.array() - lmax).exp();
  const double d0 = g0[1] - g0[0], d1 = g1[1] - g1[0];
  auto w_edge = [nodes](int i) { return (i == 0 || i == nodes - 1) ? 0.5 : 1.0; };
  double z = 0.0, m10 = 0.0, m11 = 0.0, m20 = 0.0, m21 = 0.0;
  Eigen::VectorXd marg0 = Eigen::VectorXd::Zero(nodes),
                  marg1 = Eigen::VectorXd::Zero(nodes);
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j) {
      const double w = w_edge(i) * w_edge(j) * f(i, j);
      z += w;
      m10 += w * g0[i];
      m11 += w * g1[j];
      m20 += w * g0[i] * g0[i];
      m21 += w * g1[j] * g1[j];
      marg0[i] += w_edge(j) * f(i, j);
      marg1[j] += w_edge(i) * f(i, j);
    }
  out.log_evidence = lmax + std::log(z * d0 * d1);
  out.mean = Eigen::VectorXd(2);
  out.mean << m10 / z, m11 / z;
  out.variance = Eigen::VectorXd(2);
  out.variance << m20 / z - out.mean[0] * out.mean[0],
      m21 / z - out.mean[1] * out.mean[1];
  out.marginal_grid = {g0, g1};
  out.marginal_density = {marg0 / (z * d0), marg1 / (z * d1)};
  return out;
}

/// Convenience: small synthetic targets for the oracle comparisons.
inline binreg::Dataset tiny_dataset(Eigen::Index n, Eigen::Index p_cov,
                                    std::uint64_t seed,
                                    binreg::LinkKind link = binreg::LinkKind::Probit) {
  binreg::SynthSpec spec;
  spec.rows = n;
  spec.covariates = p_cov;
  spec.seed = seed;
  spec.link = link;
  return binreg::synth_dataset(spec);
}

}  // namespace oracles
