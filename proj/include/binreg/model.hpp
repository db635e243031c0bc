#pragma once

#include <Eigen/Dense>

#include "binreg/dataset.hpp"

namespace binreg {

enum class PriorKind { Gaussian, Cauchy };
enum class LinkKind { Probit, Logit };

/// Product prior on the coefficients. `scales` holds the per-component
/// scale parameter: the Cauchy scale for kind Cauchy, the standard
/// deviation for kind Gaussian. The weakly-informative default is scale 10
/// for the intercept and 2.5 elsewhere, doubled for the Gaussian kind.
struct Prior {
  PriorKind kind = PriorKind::Gaussian;
  Eigen::VectorXd scales;

  static Prior weakly_informative(PriorKind kind, const Dataset& d);
  static Prior gaussian(Eigen::VectorXd sds);
  static Prior cauchy(Eigen::VectorXd scales);

  Eigen::Index dim() const { return scales.size(); }
  double log_density(const Eigen::VectorXd& beta) const;
  /// Adds the prior's gradient/Hessian contributions in place. The Cauchy
  /// Hessian is used as-is (it may be indefinite far from the origin).
  void add_grad_hess(const Eigen::VectorXd& beta, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const;
};

/// Link CDF F with the derivatives of log F needed everywhere downstream.
/// Both links are evaluated through the numerically-stable log-CDF forms,
/// so arguments out to +-40 are safe.
struct LinkModel {
  LinkKind kind = LinkKind::Probit;

  static LinkModel probit() { return {LinkKind::Probit}; }
  static LinkModel logit() { return {LinkKind::Logit}; }

  double log_cdf(double x) const;
  double log_cdf_d1(double x) const;
  double log_cdf_d2(double x) const;
  double cdf(double x) const;
  const char* name() const { return kind == LinkKind::Probit ? "probit" : "logit"; }
};

/// Unnormalized posterior log p(beta) + log p(D|beta) with first two
/// derivatives. The evidence constant is always excluded; evidence
/// estimates are separate outputs of the approximation/sampling layers.
struct PosteriorTarget {
  Dataset data;
  Prior prior;
  LinkModel link;

  PosteriorTarget(Dataset d, Prior pr, LinkModel l);

  Eigen::Index dim() const { return data.p(); }

  double log_likelihood(const Eigen::VectorXd& beta) const;
  double log_posterior(const Eigen::VectorXd& beta) const;

  struct Derivatives {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
  };
  Derivatives log_posterior_with_derivatives(const Eigen::VectorXd& beta) const;

  /// Gradient of the potential E(beta) = -log posterior (for HMC).
  Eigen::VectorXd potential_grad(const Eigen::VectorXd& beta) const;

  /// log posterior for each row of `points` (N x p), evaluated with
  /// `threads` workers. Partitioning never changes per-row results.
  Eigen::VectorXd log_posterior_batch(const Eigen::MatrixXd& points,
                                      int threads = 1) const;

  /// Restriction to the columns listed in `keep` (variable selection).
  PosteriorTarget restrict_to(const std::vector<Eigen::Index>& keep) const;
};

}  // namespace binreg
