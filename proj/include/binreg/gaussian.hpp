#pragma once

#include <Eigen/Dense>
#include <optional>

#include "binreg/rng.hpp"

namespace binreg {

/// Gaussian log-partition psi(r,Q) = (p/2) log 2pi - log|Q|/2 + r^T Q^{-1} r / 2,
/// i.e. log of the integral of exp(-beta^T Q beta/2 + beta^T r).
/// Throws NumericalError when Q is not SPD.
double gaussian_log_partition(const Eigen::VectorXd& r, const Eigen::MatrixXd& Q);

/// p-variate Gaussian kept in both moment (mu, Sigma) and natural (r, Q)
/// form, with an optional log-evidence attached by the approximation that
/// produced it. Construction validates SPD-ness and keeps the Cholesky of
/// Sigma for sampling and density evaluation.
class GaussianApprox {
 public:
  GaussianApprox() = default;  // empty; fill via the factories

  static GaussianApprox from_moments(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static GaussianApprox from_natural(const Eigen::VectorXd& r, const Eigen::MatrixXd& Q);

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const Eigen::MatrixXd& precision() const { return prec_; }
  const Eigen::VectorXd& shift() const { return shift_; }  // r = Q mu
  /// Lower-triangular L with Sigma = L L^T.
  const Eigen::MatrixXd& chol_cov() const { return chol_; }

  std::optional<double> log_evidence;

  /// Normalized log-density.
  double log_density(const Eigen::VectorXd& beta) const;

  Eigen::VectorXd sample(RngStream& rng) const;

  /// N iid draws (rows); draw i consumes substream(i) of `rng`, so the
  /// result is independent of any work partitioning.
  Eigen::MatrixXd sample_matrix(const RngStream& rng, Eigen::Index n) const;

 private:
  Eigen::VectorXd mean_, shift_;
  Eigen::MatrixXd cov_, prec_, chol_;
  double log_det_cov_ = 0.0;
};

}  // namespace binreg
