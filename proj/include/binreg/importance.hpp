#pragma once

#include <Eigen/Dense>
#include <functional>

#include "binreg/gaussian.hpp"
#include "binreg/model.hpp"

namespace binreg {

/// Draws with log-weights. Weights are always reduced with max-subtraction;
/// the evidence estimate is logsumexp(log_weights) - log N.
struct WeightedSample {
  Eigen::MatrixXd points;       // N x p
  Eigen::VectorXd log_weights;  // N
  double log_evidence_estimate = 0.0;
  double ef = 0.0;  // ESS / N

  Eigen::Index size() const { return points.rows(); }
  double ess() const { return ef * static_cast<double>(size()); }
  /// Weights normalized to sum to one.
  Eigen::VectorXd normalized_weights() const;
};

double effective_sample_size(const Eigen::VectorXd& log_weights);

/// Plain importance sampling from a Gaussian proposal. Draw n consumes RNG
/// substream (seed, n), so results do not depend on the thread count.
WeightedSample importance_sample(const GaussianApprox& q, const PosteriorTarget& t,
                                 Eigen::Index n, std::uint64_t seed, int threads = 1);

/// Self-normalized estimate of E[phi(beta) | D] with its plug-in
/// asymptotic standard error.
struct EstimateWithSe {
  double estimate = 0.0;
  double se = 0.0;
};
EstimateWithSe self_normalized_estimate(
    const WeightedSample& ws,
    const std::function<double(const Eigen::VectorXd&)>& phi);

/// Component posterior means/variances from a weighted sample.
Eigen::VectorXd weighted_mean(const WeightedSample& ws);
Eigen::VectorXd weighted_variance(const WeightedSample& ws);

/// Randomized-QMC importance sampling: R independently scrambled Sobol
/// replications of size n (a power of two), each yielding a WeightedSample,
/// plus across-replication variance summaries for error assessment.
struct RqmcResult {
  std::vector<WeightedSample> replications;
  Eigen::MatrixXd mean_estimates;      // R x p, per-replication posterior means
  Eigen::VectorXd evidence_estimates;  // R, log-evidence per replication
  Eigen::VectorXd mean_variance;       // p, empirical variance across replications
  double evidence_variance = 0.0;      // empirical variance of exp(log Z)
};
RqmcResult rqmc_importance_sample(const GaussianApprox& q, const PosteriorTarget& t,
                                  Eigen::Index n, int replications, std::uint64_t seed,
                                  int threads = 1);

}  // namespace binreg
