#pragma once

#include <string>

#include "binreg/metrics.hpp"
#include "binreg/model.hpp"

namespace binreg {

/// Long-run sampling reference for marginals and moments. Built from Gibbs
/// for Gaussian/probit targets and from an EP-calibrated random-walk chain
/// otherwise; optionally validated by a second independent run.
struct GoldenReference {
  std::vector<GridDensity> marginals;  // normalized, fixed per-component grids
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::VectorXd mean_se;  // batch-means standard errors
  std::string sampler;
  Eigen::Index iterations = 0;
  std::uint64_t seed = 0;
  double validation_min_ma = 1.0;  // across components, vs the second run
};

struct GoldenOptions {
  Eigen::Index iterations = 1000000;
  bool validate = false;      // second run + MA >= validation_threshold gate
  double validation_threshold = 0.998;
  int grid_points = 512;
  double grid_span = 8.0;
};

GoldenReference build_golden(const PosteriorTarget& t, std::uint64_t seed,
                             const GoldenOptions& opts = {});

}  // namespace binreg
