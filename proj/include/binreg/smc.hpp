#pragma once

#include <Eigen/Dense>
#include <vector>

#include "binreg/gaussian.hpp"
#include "binreg/model.hpp"

namespace binreg {

/// Counts from one resampling pass: O_n copies of particle n, summing to
/// the output size, with E[O_n] proportional to the weight.
struct ResampleOutcome {
  Eigen::VectorXi counts;
  std::vector<Eigen::Index> ancestors() const;
};

/// Systematic resampling driven by a single uniform draw.
ResampleOutcome systematic_resample(const Eigen::VectorXd& weights, Eigen::Index n_out,
                                    RngStream& rng);

/// Bisection choice of the next tempering exponent: the largest step whose
/// incremental-weight efficiency factor matches tau, or "finish" when the
/// jump straight to delta = 1 already clears tau.
struct NextTemperature {
  bool finish = false;
  double delta = 1.0;
  double ef = 1.0;  // measured EF at the returned delta
};
NextTemperature next_temperature(const Eigen::VectorXd& log_ratio, double delta_lo,
                                 double tau);

struct SmcStageLog {
  int stage = 0;
  double delta = 1.0;
  double ef = 1.0;
  double move_acceptance = 1.0;
  double log_evidence_increment = 0.0;
};

struct ParticleSystem {
  Eigen::MatrixXd particles;    // N x p
  Eigen::VectorXd log_weights;  // final-stage incremental weights
  std::vector<double> ladder;   // accepted deltas; last entry is 1
  double log_evidence_estimate = 0.0;
  std::vector<SmcStageLog> stages;

  Eigen::Index size() const { return particles.rows(); }
  Eigen::VectorXd normalized_weights() const;
  Eigen::VectorXd mean() const;
};

struct SmcOptions {
  double tau = 0.5;
  int move_steps = 3;
  int threads = 1;
  double bisection_tol = 1e-6;
};

/// Adaptive tempering from the Gaussian proposal q to the posterior:
/// reweight with exponent (delta - delta_lo), resample, then move_steps
/// random-walk Metropolis steps invariant for the current bridge density.
/// When EF(1) >= tau at stage 0 the output is exactly one importance
/// sampling pass with the same seed stream.
ParticleSystem temper_smc(const GaussianApprox& q, const PosteriorTarget& t,
                          Eigen::Index n, std::uint64_t seed,
                          const SmcOptions& opts = {});

}  // namespace binreg
