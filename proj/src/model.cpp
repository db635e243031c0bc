#include "binreg/model.hpp"

#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/parallel.hpp"
#include "binreg/special.hpp"

namespace binreg {

Prior Prior::weakly_informative(PriorKind kind, const Dataset& d) {
  Eigen::VectorXd s = Eigen::VectorXd::Constant(d.p(), 2.5);
  if (d.intercept_column) s[*d.intercept_column] = 10.0;
  if (kind == PriorKind::Gaussian) s *= 2.0;
  Prior pr;
  pr.kind = kind;
  pr.scales = std::move(s);
  return pr;
}

Prior Prior::gaussian(Eigen::VectorXd sds) { return {PriorKind::Gaussian, std::move(sds)}; }
Prior Prior::cauchy(Eigen::VectorXd scales) { return {PriorKind::Cauchy, std::move(scales)}; }

double Prior::log_density(const Eigen::VectorXd& beta) const {
  if (beta.size() != scales.size())
    throw ValidationError("prior: dimension mismatch");
  double lp = 0.0;
  if (kind == PriorKind::Gaussian) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      const double z = beta[j] / scales[j];
      lp += -0.5 * z * z - std::log(scales[j]) - 0.5 * kLogTwoPi;
    }
  } else {
    // log p(beta) = -sum log(pi sigma_j) - sum log(1 + beta_j^2/sigma_j^2)
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      const double z = beta[j] / scales[j];
      lp += -std::log(M_PI * scales[j]) - std::log1p(z * z);
    }
  }
  return lp;
}

void Prior::add_grad_hess(const Eigen::VectorXd& beta, Eigen::VectorXd& grad,
                          Eigen::MatrixXd& hess) const {
  if (kind == PriorKind::Gaussian) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      const double inv_v = 1.0 / (scales[j] * scales[j]);
      grad[j] += -beta[j] * inv_v;
      hess(j, j) += -inv_v;
    }
  } else {
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      const double s2 = scales[j] * scales[j];
      const double denom = s2 + beta[j] * beta[j];
      grad[j] += -2.0 * beta[j] / denom;
      hess(j, j) += -2.0 * (s2 - beta[j] * beta[j]) / (denom * denom);
    }
  }
}

double LinkModel::log_cdf(double x) const {
  return kind == LinkKind::Probit ? log_norm_cdf(x) : log_logistic_cdf(x);
}
double LinkModel::log_cdf_d1(double x) const {
  return kind == LinkKind::Probit ? log_norm_cdf_d1(x) : log_logistic_cdf_d1(x);
}
double LinkModel::log_cdf_d2(double x) const {
  return kind == LinkKind::Probit ? log_norm_cdf_d2(x) : log_logistic_cdf_d2(x);
}
double LinkModel::cdf(double x) const {
  return kind == LinkKind::Probit ? norm_cdf(x) : 1.0 / (1.0 + std::exp(-x));
}

PosteriorTarget::PosteriorTarget(Dataset d, Prior pr, LinkModel l)
    : data(std::move(d)), prior(std::move(pr)), link(l) {
  if (prior.dim() != data.p())
    throw ValidationError("posterior target: prior dimension != covariate count");
}

double PosteriorTarget::log_likelihood(const Eigen::VectorXd& beta) const {
  if (!beta.allFinite()) throw ValidationError("log_likelihood: non-finite beta");
  if (data.n() == 0) return 0.0;
  const Eigen::VectorXd eta = (data.X * beta).cwiseProduct(data.y);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += link.log_cdf(eta[i]);
  return ll;
}

double PosteriorTarget::log_posterior(const Eigen::VectorXd& beta) const {
  return prior.log_density(beta) + log_likelihood(beta);
}

PosteriorTarget::Derivatives PosteriorTarget::log_posterior_with_derivatives(
    const Eigen::VectorXd& beta) const {
  if (!beta.allFinite())
    throw ValidationError("log_posterior_with_derivatives: non-finite beta");
  const Eigen::Index p = dim();
  Derivatives d;
  d.value = prior.log_density(beta);
  d.grad = Eigen::VectorXd::Zero(p);
  d.hess = Eigen::MatrixXd::Zero(p, p);
  prior.add_grad_hess(beta, d.grad, d.hess);

  if (data.n() > 0) {
    const Eigen::VectorXd eta = (data.X * beta).cwiseProduct(data.y);
    // grad += sum_i (log F)'(eta_i) y_i x_i; hess += sum_i (log F)''(eta_i) x_i x_i^T
    Eigen::VectorXd g1(eta.size()), g2(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      d.value += link.log_cdf(eta[i]);
      g1[i] = link.log_cdf_d1(eta[i]) * data.y[i];
      g2[i] = link.log_cdf_d2(eta[i]);
    }
    d.grad.noalias() += data.X.transpose() * g1;
    d.hess.noalias() += data.X.transpose() * g2.asDiagonal() * data.X;
  }
  return d;
}

Eigen::VectorXd PosteriorTarget::potential_grad(const Eigen::VectorXd& beta) const {
  const Eigen::Index p = dim();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(0, 0);
  // Prior gradient (Hessian not needed; pass a throwaway p x p only if used).
  Eigen::MatrixXd dummy = Eigen::MatrixXd::Zero(p, p);
  prior.add_grad_hess(beta, grad, dummy);
  if (data.n() > 0) {
    const Eigen::VectorXd eta = (data.X * beta).cwiseProduct(data.y);
    Eigen::VectorXd g1(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i)
      g1[i] = link.log_cdf_d1(eta[i]) * data.y[i];
    grad.noalias() += data.X.transpose() * g1;
  }
  return -grad;
}

Eigen::VectorXd PosteriorTarget::log_posterior_batch(const Eigen::MatrixXd& points,
                                                     int threads) const {
  Eigen::VectorXd out(points.rows());
  parallel_for(points.rows(), threads, [&](std::int64_t i) {
    out[i] = log_posterior(points.row(i).transpose());
  });
  return out;
}

PosteriorTarget PosteriorTarget::restrict_to(
    const std::vector<Eigen::Index>& keep) const {
  Dataset d;
  d.y = data.y;
  d.X.resize(data.n(), static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd scales(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    d.X.col(static_cast<Eigen::Index>(k)) = data.X.col(keep[k]);
    d.column_names.push_back(data.column_names[keep[k]]);
    scales[static_cast<Eigen::Index>(k)] = prior.scales[keep[k]];
    if (data.intercept_column && keep[k] == *data.intercept_column)
      d.intercept_column = static_cast<Eigen::Index>(k);
  }
  d.standardized = data.standardized;
  Prior pr{prior.kind, std::move(scales)};
  return PosteriorTarget(std::move(d), std::move(pr), link);
}

}  // namespace binreg
