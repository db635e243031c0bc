#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "binreg/gaussian.hpp"
#include "binreg/model.hpp"

namespace binreg {

/// MCMC output: all states (burn-in rows first), log-posterior values,
/// post-burn-in acceptance rate and a flat tuning record for the sidecar.
struct ChainTrace {
  Eigen::MatrixXd states;      // T x p
  Eigen::VectorXd log_post;    // T
  Eigen::Index burn_in = 0;
  double acceptance_rate = 0.0;
  std::vector<std::pair<std::string, double>> tuning;

  Eigen::Index length() const { return states.rows(); }
  /// View of the kept (post burn-in) states.
  Eigen::Ref<const Eigen::MatrixXd> kept() const {
    return states.bottomRows(states.rows() - burn_in);
  }
  Eigen::VectorXd mean() const;
  Eigen::VectorXd variance() const;
};

/// Batch-means standard error of the mean of x (kept part of a chain).
double batch_means_se(const Eigen::VectorXd& x, int batches = 50);

struct McmcOptions {
  double burn_fraction = 0.1;
  int threads = 1;  // chains are sequential; kept for interface symmetry
};

/// Random-walk Metropolis with proposal N(beta, (2.38^2/p) Sigma_q),
/// started at the calibration mean.
ChainTrace rwmh(const PosteriorTarget& t, const GaussianApprox& q_calib,
                Eigen::Index iterations, std::uint64_t seed,
                const McmcOptions& opts = {});

/// Phase-space point for Hamiltonian dynamics.
struct PhasePoint {
  Eigen::VectorXd position;
  Eigen::VectorXd momentum;
};

/// Kinetic-energy specification with M^{-1} = Sigma (Sigma = L L^T).
/// Momenta are sampled with covariance M = Sigma^{-1}; the leapfrog drift
/// multiplies by M^{-1} = Sigma.
class HmcMass {
 public:
  HmcMass() = default;  // identity mass
  explicit HmcMass(Eigen::MatrixXd chol_cov) : chol_(std::move(chol_cov)) {}

  bool identity() const { return chol_.size() == 0; }
  Eigen::VectorXd minv_mul(const Eigen::VectorXd& a) const;
  double kinetic(const Eigen::VectorXd& a) const;
  Eigen::VectorXd sample_momentum(RngStream& rng, Eigen::Index p) const;

 private:
  Eigen::MatrixXd chol_;
};

/// One leapfrog step: half kick, drift, half kick. Volume preserving and
/// time reversible. Sets *diverged when the gradient goes non-finite.
PhasePoint leapfrog(const PhasePoint& pp,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_e,
                    double eps, const HmcMass& mass, bool* diverged = nullptr);

struct HmcOptions {
  double target_accept = 0.65;
  double kappa = 0.75;        // vanishing-adaptation exponent
  double eps_l_product = 1.0; // L = round(eps_l_product / eps)
  double burn_fraction = 0.1; // adaptation frozen after burn-in
  double divergence_threshold = 1000.0;
};

/// HMC with mass M^{-1} = Sigma_q, step size adapted toward the target
/// acceptance rate during burn-in and frozen afterwards.
ChainTrace hmc(const PosteriorTarget& t, const GaussianApprox& q_calib,
               Eigen::Index iterations, std::uint64_t seed,
               const HmcOptions& opts = {});

/// Generic-target variants used by the SMC move kernel and the tuning
/// tests (the target is any unnormalized log-density).
using LogDensity = std::function<double(const Eigen::VectorXd&)>;
ChainTrace rwmh_generic(const LogDensity& log_pi, Eigen::Index dim,
                        const GaussianApprox& q_calib, Eigen::Index iterations,
                        std::uint64_t seed, const McmcOptions& opts = {});
ChainTrace hmc_generic(const LogDensity& log_pi,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_e,
                       Eigen::Index dim, const GaussianApprox& q_calib,
                       Eigen::Index iterations, std::uint64_t seed,
                       const HmcOptions& opts = {});

}  // namespace binreg
