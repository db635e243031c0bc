#include "binreg/gaussian.hpp"

#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/special.hpp"

namespace binreg {

double gaussian_log_partition(const Eigen::VectorXd& r, const Eigen::MatrixXd& Q) {
  const Eigen::Index p = r.size();
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gaussian_log_partition: Q is not positive definite");
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) log_det += 2.0 * std::log(llt.matrixL()(j, j));
  const Eigen::VectorXd mu = llt.solve(r);
  return 0.5 * p * kLogTwoPi - 0.5 * log_det + 0.5 * r.dot(mu);
}

GaussianApprox GaussianApprox::from_moments(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  GaussianApprox g;
  g.mean_ = std::move(mean);
  g.cov_ = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov_);
  if (llt.info() != Eigen::Success)
    throw NumericalError("GaussianApprox: covariance is not positive definite");
  g.chol_ = llt.matrixL();
  const Eigen::Index p = g.mean_.size();
  g.prec_ = llt.solve(Eigen::MatrixXd::Identity(p, p));
  g.shift_ = g.prec_ * g.mean_;
  g.log_det_cov_ = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) g.log_det_cov_ += 2.0 * std::log(g.chol_(j, j));
  return g;
}

GaussianApprox GaussianApprox::from_natural(const Eigen::VectorXd& r,
                                            const Eigen::MatrixXd& Q) {
  const Eigen::MatrixXd Qs = 0.5 * (Q + Q.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(Qs);
  if (llt.info() != Eigen::Success)
    throw NumericalError("GaussianApprox: precision is not positive definite");
  const Eigen::Index p = r.size();
  GaussianApprox g = from_moments(llt.solve(r), llt.solve(Eigen::MatrixXd::Identity(p, p)));
  g.prec_ = Qs;  // keep the exact natural parameters the caller supplied
  g.shift_ = r;
  return g;
}

double GaussianApprox::log_density(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd d = beta - mean_;
  const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(d);
  return -0.5 * dim() * kLogTwoPi - 0.5 * log_det_cov_ - 0.5 * z.squaredNorm();
}

Eigen::VectorXd GaussianApprox::sample(RngStream& rng) const {
  Eigen::VectorXd z(dim());
  for (Eigen::Index j = 0; j < dim(); ++j) z[j] = rng.normal();
  return mean_ + chol_ * z;
}

Eigen::MatrixXd GaussianApprox::sample_matrix(const RngStream& rng, Eigen::Index n) const {
  Eigen::MatrixXd out(n, dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    RngStream s = rng.substream(static_cast<std::uint64_t>(i));
    out.row(i) = sample(s).transpose();
  }
  return out;
}

}  // namespace binreg
