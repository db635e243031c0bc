#pragma once

#include <Eigen/Dense>
#include <vector>

#include "binreg/gaussian.hpp"
#include "binreg/model.hpp"

namespace binreg {

/// Moments of a hybrid (tilted) distribution: the mass is measured against
/// the *normalized* cavity, so for a constant site l(beta)=1/2 the log mass
/// is log(1/2) regardless of the cavity.
struct HybridMoments {
  double log_z;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Exact tilted moments for a probit site F(y x^T beta) against a Gaussian
/// cavity: with m = x^T mu_c, v = x^T Sigma_c x and z = y m / sqrt(1+v),
/// the mass is Phi(z) and the moment shifts act along Sigma_c x.
HybridMoments probit_site_moments(const GaussianApprox& cavity, double y,
                                  const Eigen::VectorXd& x);

/// Same via Gauss-Hermite quadrature on the 1-D projection (logit link).
HybridMoments logit_site_moments(const GaussianApprox& cavity, double y,
                                 const Eigen::VectorXd& x, int quad_nodes = 64);

/// One likelihood site in natural form on its own projection:
/// Q_i = c x_i x_i^T, r_i = d x_i, plus the site scale log_z.
struct EpSite {
  double c = 0.0;
  double d = 0.0;
  double log_z = 0.0;
};

enum class EpSchedule { Sequential, Parallel };

struct EpOptions {
  EpSchedule schedule = EpSchedule::Sequential;
  double damping = 1.0;   // natural-parameter damping in (0,1]
  double tol = 1e-6;      // max change in (mu, diag Sigma) per sweep
  int max_sweeps = 200;
  int quad_nodes = 64;    // logit / Cauchy site quadrature
};

/// Full EP state: likelihood sites, an optional updatable factorized prior
/// site (Cauchy), and the global Gaussian in natural + moment form.
class EpState {
 public:
  EpState(const PosteriorTarget& t, const EpOptions& opts);

  /// Moment-matching update of likelihood site i. Returns false when the
  /// update had to be skipped (cavity or refreshed global not PD).
  bool update_site(Eigen::Index i);

  /// Component-wise update of the Cauchy prior site (no-op for Gaussian).
  void update_prior_site();

  /// One full pass over sites per the schedule. Returns the max absolute
  /// change in (mu, diag Sigma).
  double sweep();

  double log_evidence() const;
  GaussianApprox approx() const;

  const Eigen::MatrixXd& global_precision() const { return q_; }
  const Eigen::VectorXd& global_shift() const { return r_; }
  const Eigen::VectorXd& mean() const { return mu_; }
  const Eigen::MatrixXd& cov() const { return sigma_; }
  const std::vector<EpSite>& sites() const { return sites_; }

  int sweep_count = 0;
  bool converged = false;
  int skipped_updates = 0;

 private:
  friend struct EpFitDriver;
  const PosteriorTarget* target_;
  EpOptions opts_;
  std::vector<EpSite> sites_;
  // Prior site: fixed naturals for a Gaussian prior; per-component
  // updatable naturals (+ scales) for a Cauchy prior.
  bool prior_is_site_ = false;
  Eigen::VectorXd prior_c_, prior_d_, prior_log_z_;
  Eigen::MatrixXd q_, sigma_;
  Eigen::VectorXd r_, mu_;
  double log_det_q_ = 0.0;

  void refresh_global();
  bool apply_rank1(const Eigen::VectorXd& x, double dc, double dd);
  double site_log_scale(const Eigen::VectorXd& x, double c_tot, double d_tot,
                        double log_zh) const;
};

struct EpResult {
  GaussianApprox approx;
  EpState state;
};

/// Runs EP to convergence; on PD trouble retries with damping 0.5 then
/// 0.25. Gaussian priors enter as the fixed q0 site, Cauchy priors as an
/// updatable extra site handled component-wise by quadrature.
EpResult ep_fit(const PosteriorTarget& t, const EpOptions& opts = {});

}  // namespace binreg
