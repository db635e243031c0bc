#include "binreg/ep.hpp"

#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/quadrature.hpp"
#include "binreg/special.hpp"

namespace binreg {

namespace {

constexpr double kLogHalf = -0.69314718055994530942;

// Scalar tilt summary on a 1-D projection with cavity N(m, v):
// log mass, and the first/second derivatives of the log mass in m.
struct ScalarTilt {
  double log_z;
  double alpha;
  double g2;
};

ScalarTilt probit_tilt(double m, double v, double y) {
  const double denom = std::sqrt(1.0 + v);
  const double z = y * m / denom;
  const double rho = log_norm_cdf_d1(z);
  ScalarTilt t;
  t.log_z = log_norm_cdf(z);
  t.alpha = y * rho / denom;
  t.g2 = log_norm_cdf_d2(z) / (1.0 + v);
  return t;
}

ScalarTilt quad_tilt(const std::function<double(double)>& log_f, double m, double v,
                     int nodes) {
  const TiltedMoments tm = tilted_moments_1d(log_f, m, v, nodes);
  ScalarTilt t;
  t.log_z = tm.log_mass;
  t.alpha = (tm.mean - m) / v;
  t.g2 = (tm.var - v) / (v * v);
  return t;
}

ScalarTilt logit_tilt(double m, double v, double y, int nodes) {
  return quad_tilt([y](double s) { return log_logistic_cdf(y * s); }, m, v, nodes);
}

ScalarTilt cauchy_tilt(double m, double v, double scale, int nodes) {
  return quad_tilt(
      [scale](double b) {
        const double z = b / scale;
        return -std::log(M_PI * scale) - std::log1p(z * z);
      },
      m, v, nodes);
}

HybridMoments expand_tilt(const GaussianApprox& cavity, const Eigen::VectorXd& x,
                          const ScalarTilt& t) {
  const Eigen::VectorXd sx = cavity.cov() * x;
  HybridMoments h;
  h.log_z = t.log_z;
  h.mean = cavity.mean() + t.alpha * sx;
  h.cov = cavity.cov() + t.g2 * (sx * sx.transpose());
  return h;
}

}  // namespace

HybridMoments probit_site_moments(const GaussianApprox& cavity, double y,
                                  const Eigen::VectorXd& x) {
  if (x.squaredNorm() == 0.0) return {kLogHalf, cavity.mean(), cavity.cov()};
  const double v = x.dot(cavity.cov() * x);
  if (!(v > 0.0))
    throw NumericalError("probit_site_moments: cavity not PD along x");
  return expand_tilt(cavity, x, probit_tilt(x.dot(cavity.mean()), v, y));
}

HybridMoments logit_site_moments(const GaussianApprox& cavity, double y,
                                 const Eigen::VectorXd& x, int quad_nodes) {
  if (x.squaredNorm() == 0.0) return {kLogHalf, cavity.mean(), cavity.cov()};
  const double v = x.dot(cavity.cov() * x);
  if (!(v > 0.0))
    throw NumericalError("logit_site_moments: cavity not PD along x");
  return expand_tilt(cavity, x, logit_tilt(x.dot(cavity.mean()), v, y, quad_nodes));
}

EpState::EpState(const PosteriorTarget& t, const EpOptions& opts)
    : target_(&t), opts_(opts) {
  const Eigen::Index p = t.dim();
  const Eigen::Index n = t.data.n();
  sites_.assign(n, EpSite{});
  for (Eigen::Index i = 0; i < n; ++i)
    if (t.data.X.row(i).squaredNorm() == 0.0) sites_[i].log_z = kLogHalf;

  prior_is_site_ = t.prior.kind == PriorKind::Cauchy;
  if (prior_is_site_) {
    prior_c_ = t.prior.scales.array().square().inverse();
    prior_d_ = Eigen::VectorXd::Zero(p);
    prior_log_z_ = Eigen::VectorXd::Zero(p);
  } else {
    prior_c_ = (t.prior.scales.array().square()).inverse();
    prior_d_ = Eigen::VectorXd::Zero(p);
    // Fixed prior site scale: the prior is a normalized density, so its
    // scale is minus the log-partition of its own naturals.
    double psi0 = 0.5 * p * kLogTwoPi;
    for (Eigen::Index j = 0; j < p; ++j) psi0 -= 0.5 * std::log(prior_c_[j]);
    prior_log_z_ = Eigen::VectorXd::Constant(1, -psi0);
  }

  q_ = Eigen::MatrixXd(prior_c_.asDiagonal());
  r_ = prior_d_;
  refresh_global();
}

void EpState::refresh_global() {
  Eigen::LLT<Eigen::MatrixXd> llt(q_);
  if (llt.info() != Eigen::Success)
    throw NumericalError("ep: global precision is not positive definite");
  const Eigen::Index p = q_.rows();
  sigma_ = llt.solve(Eigen::MatrixXd::Identity(p, p));
  mu_ = sigma_ * r_;
  log_det_q_ = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) log_det_q_ += 2.0 * std::log(llt.matrixL()(j, j));
}

bool EpState::apply_rank1(const Eigen::VectorXd& x, double dc, double dd) {
  const Eigen::VectorXd sx = sigma_ * x;
  const double vg = x.dot(sx);
  const double den = 1.0 + dc * vg;
  if (!(den > 1e-12)) return false;  // update would break PD
  q_.noalias() += dc * (x * x.transpose());
  r_ += dd * x;
  sigma_.noalias() -= (dc / den) * (sx * sx.transpose());
  log_det_q_ += std::log(den);
  mu_.noalias() = sigma_ * r_;
  return true;
}

double EpState::site_log_scale(const Eigen::VectorXd& x, double c_tot, double d_tot,
                               double log_zh) const {
  // log s = log Zh + psi(cavity) - psi(global), with the cavity obtained by
  // a rank-1 downdate of the current global naturals.
  const Eigen::VectorXd sx = sigma_ * x;
  const double v = x.dot(sx);
  const double den = 1.0 - c_tot * v;
  if (!(den > 0.0)) return log_zh;  // cavity not PD; leave the scale neutral
  const Eigen::VectorXd r_cav = r_ - d_tot * x;
  const Eigen::VectorXd a = sigma_ * r_cav;
  const double quad_cav = r_cav.dot(a) + (c_tot / den) * std::pow(x.dot(a), 2);
  const double psi_cav = -0.5 * (log_det_q_ + std::log(den)) + 0.5 * quad_cav;
  const double psi_new = -0.5 * log_det_q_ + 0.5 * r_.dot(mu_);
  return log_zh + psi_cav - psi_new;  // the (p/2) log 2pi terms cancel
}

bool EpState::update_site(Eigen::Index i) {
  const Eigen::VectorXd x = target_->data.X.row(i).transpose();
  if (x.squaredNorm() == 0.0) return true;  // constant site, set at init
  const double y = target_->data.y[i];
  EpSite& s = sites_[i];

  const Eigen::VectorXd sx = sigma_ * x;
  const double vg = x.dot(sx);
  const double mg = x.dot(mu_);
  if (!(vg > 0.0)) {
    ++skipped_updates;
    return false;
  }
  const double prec_c = 1.0 / vg - s.c;
  if (!(prec_c > 1e-12)) {
    ++skipped_updates;
    return false;
  }
  const double vc = 1.0 / prec_c;
  const double mc = vc * (mg / vg - s.d);

  const ScalarTilt t = target_->link.kind == LinkKind::Probit
                           ? probit_tilt(mc, vc, y)
                           : logit_tilt(mc, vc, y, opts_.quad_nodes);
  const double vh = vc + vc * vc * t.g2;
  if (!(vh > 0.0)) {
    ++skipped_updates;
    return false;
  }
  const double mh = mc + vc * t.alpha;

  const double eta = opts_.damping;
  const double c_new = (1.0 - eta) * s.c + eta * (1.0 / vh - prec_c);
  const double d_new = (1.0 - eta) * s.d + eta * (mh / vh - mc * prec_c);

  double dc = c_new - s.c, dd = d_new - s.d;
  if (!apply_rank1(x, dc, dd)) {
    dc *= 0.5;
    dd *= 0.5;
    if (!apply_rank1(x, dc, dd)) {
      ++skipped_updates;
      return false;
    }
  }
  s.c += dc;
  s.d += dd;
  s.log_z = site_log_scale(x, s.c, s.d, t.log_z);
  return true;
}

void EpState::update_prior_site() {
  if (!prior_is_site_) return;
  const Eigen::Index p = q_.rows();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double vg = sigma_(j, j);
    const double mg = mu_[j];
    if (!(vg > 0.0)) {
      ++skipped_updates;
      continue;
    }
    const double prec_c = 1.0 / vg - prior_c_[j];
    if (!(prec_c > 1e-12)) {
      ++skipped_updates;
      continue;
    }
    const double vc = 1.0 / prec_c;
    const double mc = vc * (mg / vg - prior_d_[j]);
    const ScalarTilt t =
        cauchy_tilt(mc, vc, target_->prior.scales[j], std::max(96, opts_.quad_nodes));
    const double vh = vc + vc * vc * t.g2;
    if (!(vh > 0.0)) {
      ++skipped_updates;
      continue;
    }
    const double mh = mc + vc * t.alpha;
    const double eta = opts_.damping;
    const double c_new = (1.0 - eta) * prior_c_[j] + eta * (1.0 / vh - prec_c);
    const double d_new = (1.0 - eta) * prior_d_[j] + eta * (mh / vh - mc * prec_c);

    Eigen::VectorXd ej = Eigen::VectorXd::Zero(p);
    ej[j] = 1.0;
    double dc = c_new - prior_c_[j], dd = d_new - prior_d_[j];
    if (!apply_rank1(ej, dc, dd)) {
      dc *= 0.5;
      dd *= 0.5;
      if (!apply_rank1(ej, dc, dd)) {
        ++skipped_updates;
        continue;
      }
    }
    prior_c_[j] += dc;
    prior_d_[j] += dd;
    prior_log_z_[j] = site_log_scale(ej, prior_c_[j], prior_d_[j], t.log_z);
  }
}

double EpState::sweep() {
  const Eigen::VectorXd mu_before = mu_;
  const Eigen::VectorXd var_before = sigma_.diagonal();
  const Eigen::Index n = target_->data.n();

  if (opts_.schedule == EpSchedule::Sequential) {
    update_prior_site();
    for (Eigen::Index i = 0; i < n; ++i) update_site(i);
    refresh_global();  // re-factorize once per sweep to shed rank-1 drift
  } else {
    // Parallel schedule: all cavities and tilts from the frozen state;
    // one combine and one factorization at the end of the sweep.
    const Eigen::MatrixXd sigma0 = sigma_;
    const Eigen::VectorXd mu0 = mu_;
    std::vector<EpSite> next = sites_;
    std::vector<double> log_zh(n, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd x = target_->data.X.row(i).transpose();
      if (x.squaredNorm() == 0.0) continue;
      const double vg = x.dot(sigma0 * x);
      const double mg = x.dot(mu0);
      if (!(vg > 0.0)) {
        ++skipped_updates;
        continue;
      }
      const double prec_c = 1.0 / vg - sites_[i].c;
      if (!(prec_c > 1e-12)) {
        ++skipped_updates;
        continue;
      }
      const double vc = 1.0 / prec_c;
      const double mc = vc * (mg / vg - sites_[i].d);
      const ScalarTilt t = target_->link.kind == LinkKind::Probit
                               ? probit_tilt(mc, vc, target_->data.y[i])
                               : logit_tilt(mc, vc, target_->data.y[i], opts_.quad_nodes);
      const double vh = vc + vc * vc * t.g2;
      if (!(vh > 0.0)) {
        ++skipped_updates;
        continue;
      }
      const double mh = mc + vc * t.alpha;
      const double eta = opts_.damping;
      next[i].c = (1.0 - eta) * sites_[i].c + eta * (1.0 / vh - prec_c);
      next[i].d = (1.0 - eta) * sites_[i].d + eta * (mh / vh - mc * prec_c);
      log_zh[i] = t.log_z;
    }
    sites_ = std::move(next);
    q_ = Eigen::MatrixXd(prior_c_.asDiagonal());
    r_ = prior_d_;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd x = target_->data.X.row(i).transpose();
      q_.noalias() += sites_[i].c * (x * x.transpose());
      r_ += sites_[i].d * x;
    }
    refresh_global();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd x = target_->data.X.row(i).transpose();
      if (x.squaredNorm() == 0.0) continue;
      sites_[i].log_z = site_log_scale(x, sites_[i].c, sites_[i].d, log_zh[i]);
    }
    if (prior_is_site_) update_prior_site();
  }

  const double dmu = (mu_ - mu_before).cwiseAbs().maxCoeff();
  const double dvar = (sigma_.diagonal() - var_before).cwiseAbs().maxCoeff();
  return std::max(dmu, dvar);
}

double EpState::log_evidence() const {
  double lz = prior_log_z_.sum();
  for (const EpSite& s : sites_) lz += s.log_z;
  const double psi = 0.5 * q_.rows() * kLogTwoPi - 0.5 * log_det_q_ + 0.5 * r_.dot(mu_);
  return lz + psi;
}

GaussianApprox EpState::approx() const {
  GaussianApprox g = GaussianApprox::from_natural(r_, q_);
  g.log_evidence = log_evidence();
  return g;
}

EpResult ep_fit(const PosteriorTarget& t, const EpOptions& opts) {
  const double base = opts.damping;
  std::string last_error;
  for (const double eta : {base, 0.5 * base, 0.25 * base}) {
    EpOptions o = opts;
    o.damping = eta;
    try {
      EpState state(t, o);
      for (int sweep = 0; sweep < o.max_sweeps; ++sweep) {
        const double delta = state.sweep();
        ++state.sweep_count;
        if (delta < o.tol) {
          state.converged = true;
          break;
        }
      }
      return {state.approx(), std::move(state)};
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  throw NumericalError("ep_fit: failed at all damping levels (" + last_error + ")");
}

}  // namespace binreg
