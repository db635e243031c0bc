#pragma once

#include <Eigen/Dense>
#include <vector>

#include "binreg/importance.hpp"
#include "binreg/mcmc.hpp"

namespace binreg {

/// A univariate density tabulated on an ordered grid.
struct GridDensity {
  Eigen::VectorXd grid;
  Eigen::VectorXd density;
  double trapezoid_mass() const;
  GridDensity normalized() const;
};

/// MA = 1 - L1(q, ref)/2 by the trapezoid rule on the merged grid, with
/// each density linearly interpolated and zero outside its own range.
/// Densities with disjoint ranges give 0; identical densities give 1.
double marginal_accuracy(const GridDensity& q, const GridDensity& ref);

/// Inefficiency relative to importance sampling:
/// (mse_m / mse_is) * (cpu_is / cpu_m). All inputs must be positive.
double iris(double mse_m, double cpu_m, double mse_is, double cpu_is);

/// Weighted Gaussian KDE of one component on an explicit grid. Bandwidth
/// is Silverman's rule evaluated at the effective sample size.
GridDensity kde_density(const Eigen::VectorXd& values, const Eigen::VectorXd& weights,
                        const Eigen::VectorXd& grid);

struct KdeGridSpec {
  int points = 512;
  double span = 8.0;  // +- span * weighted sd around the weighted mean
};

/// Per-component KDE marginals of a weighted sample (needs ESS >= 100).
std::vector<GridDensity> kde_marginals(const WeightedSample& ws,
                                       const KdeGridSpec& spec = {});
/// Same for an MCMC trace (kept part, unit weights).
std::vector<GridDensity> kde_marginals(const ChainTrace& trace,
                                       const KdeGridSpec& spec = {});

/// KDE of weighted values on an automatically spanned grid.
GridDensity kde_auto_grid(const Eigen::VectorXd& values, const Eigen::VectorXd& weights,
                          const KdeGridSpec& spec = {});

double median(std::vector<double> v);

}  // namespace binreg
