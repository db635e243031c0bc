#include "binreg/mcmc.hpp"

#include <cmath>

#include "binreg/errors.hpp"

namespace binreg {

Eigen::VectorXd ChainTrace::mean() const {
  return kept().colwise().mean().transpose();
}

Eigen::VectorXd ChainTrace::variance() const {
  const auto k = kept();
  const Eigen::RowVectorXd m = k.colwise().mean();
  return ((k.rowwise() - m).array().square().colwise().sum() / (k.rows() - 1))
      .transpose();
}

double batch_means_se(const Eigen::VectorXd& x, int batches) {
  const Eigen::Index n = x.size();
  if (batches < 2 || n < 2 * batches)
    throw ValidationError("batch_means_se: chain too short for batch count");
  const Eigen::Index len = n / batches;
  Eigen::VectorXd means(batches);
  for (int b = 0; b < batches; ++b) means[b] = x.segment(b * len, len).mean();
  const double grand = means.mean();
  const double var_b = (means.array() - grand).square().sum() / (batches - 1);
  return std::sqrt(var_b / batches);
}

ChainTrace rwmh_generic(const LogDensity& log_pi, Eigen::Index dim,
                        const GaussianApprox& q_calib, Eigen::Index iterations,
                        std::uint64_t seed, const McmcOptions& opts) {
  if (iterations < 1) throw ValidationError("rwmh: need at least one iteration");
  const double lambda = 2.38;
  const double scale = lambda / std::sqrt(static_cast<double>(dim));
  const Eigen::MatrixXd prop_chol = scale * q_calib.chol_cov();

  RngStream rng(seed);
  ChainTrace trace;
  trace.states.resize(iterations, dim);
  trace.log_post.resize(iterations);
  trace.burn_in = static_cast<Eigen::Index>(opts.burn_fraction * iterations);

  Eigen::VectorXd beta = q_calib.mean();
  double lp = log_pi(beta);
  Eigen::Index accepted = 0, accepted_kept = 0;
  Eigen::VectorXd z(dim);
  for (Eigen::Index it = 0; it < iterations; ++it) {
    for (Eigen::Index j = 0; j < dim; ++j) z[j] = rng.normal();
    const Eigen::VectorXd prop = beta + prop_chol * z;
    const double lp_prop = log_pi(prop);
    if (std::log(rng.uniform()) < lp_prop - lp) {
      beta = prop;
      lp = lp_prop;
      ++accepted;
      if (it >= trace.burn_in) ++accepted_kept;
    }
    trace.states.row(it) = beta.transpose();
    trace.log_post[it] = lp;
  }
  const Eigen::Index kept_n = iterations - trace.burn_in;
  trace.acceptance_rate = kept_n > 0 ? static_cast<double>(accepted_kept) / kept_n
                                     : static_cast<double>(accepted) / iterations;
  trace.tuning = {{"lambda", lambda},
                  {"overall_acceptance", static_cast<double>(accepted) / iterations}};
  return trace;
}

ChainTrace rwmh(const PosteriorTarget& t, const GaussianApprox& q_calib,
                Eigen::Index iterations, std::uint64_t seed, const McmcOptions& opts) {
  return rwmh_generic([&t](const Eigen::VectorXd& b) { return t.log_posterior(b); },
                      t.dim(), q_calib, iterations, seed, opts);
}

Eigen::VectorXd HmcMass::minv_mul(const Eigen::VectorXd& a) const {
  if (identity()) return a;
  return chol_ * (chol_.transpose() * a);
}

double HmcMass::kinetic(const Eigen::VectorXd& a) const {
  if (identity()) return 0.5 * a.squaredNorm();
  return 0.5 * (chol_.transpose() * a).squaredNorm();
}

Eigen::VectorXd HmcMass::sample_momentum(RngStream& rng, Eigen::Index p) const {
  Eigen::VectorXd z(p);
  for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
  if (identity()) return z;
  // momentum ~ N(0, Sigma^{-1}) = L^{-T} z.
  return chol_.transpose().triangularView<Eigen::Upper>().solve(z);
}

PhasePoint leapfrog(const PhasePoint& pp,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_e,
                    double eps, const HmcMass& mass, bool* diverged) {
  if (!(eps > 0.0)) throw ValidationError("leapfrog: step size must be positive");
  if (diverged) *diverged = false;
  PhasePoint out;
  Eigen::VectorXd g = grad_e(pp.position);
  if (!g.allFinite()) {
    if (diverged) *diverged = true;
    return pp;
  }
  out.momentum = pp.momentum - 0.5 * eps * g;
  out.position = pp.position + eps * mass.minv_mul(out.momentum);
  g = grad_e(out.position);
  if (!g.allFinite()) {
    if (diverged) *diverged = true;
    return pp;
  }
  out.momentum -= 0.5 * eps * g;
  return out;
}

ChainTrace hmc_generic(const LogDensity& log_pi,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_e,
                       Eigen::Index dim, const GaussianApprox& q_calib,
                       Eigen::Index iterations, std::uint64_t seed,
                       const HmcOptions& opts) {
  if (iterations < 1) throw ValidationError("hmc: need at least one iteration");
  const HmcMass mass(q_calib.chol_cov());

  RngStream rng(seed);
  ChainTrace trace;
  trace.states.resize(iterations, dim);
  trace.log_post.resize(iterations);
  trace.burn_in = static_cast<Eigen::Index>(opts.burn_fraction * iterations);

  double eps = 0.1 * std::pow(static_cast<double>(dim), -0.25);
  const double eps_min = 1e-4, eps_max = 10.0;

  Eigen::VectorXd beta = q_calib.mean();
  double lp = log_pi(beta);
  Eigen::Index accepted = 0, accepted_kept = 0, divergences = 0;
  for (Eigen::Index it = 0; it < iterations; ++it) {
    PhasePoint pp{beta, mass.sample_momentum(rng, dim)};
    const double h_old = -lp + mass.kinetic(pp.momentum);
    const int steps =
        std::max(1, static_cast<int>(std::lround(opts.eps_l_product / eps)));
    bool diverged = false;
    for (int s = 0; s < steps && !diverged; ++s)
      pp = leapfrog(pp, grad_e, eps, mass, &diverged);
    double lp_prop = -std::numeric_limits<double>::infinity();
    double h_new = std::numeric_limits<double>::infinity();
    if (!diverged) {
      lp_prop = log_pi(pp.position);
      h_new = -lp_prop + mass.kinetic(pp.momentum);
    }
    const double dh = h_old - h_new;
    bool accept = false;
    if (!diverged && std::abs(dh) <= opts.divergence_threshold) {
      accept = std::log(rng.uniform()) < dh;
    } else {
      ++divergences;
    }
    if (accept) {
      beta = pp.position;
      lp = lp_prop;
      ++accepted;
      if (it >= trace.burn_in) ++accepted_kept;
    }
    trace.states.row(it) = beta.transpose();
    trace.log_post[it] = lp;

    // Vanishing adaptation toward the target rate, frozen after burn-in:
    // eps_t = eps_{t-1} - eta_t (R_t - target), eta_t = t^{-kappa}.
    if (it < trace.burn_in) {
      const double r_t = static_cast<double>(accepted) / (it + 1);
      const double eta = std::pow(static_cast<double>(it + 1), -opts.kappa);
      eps = std::clamp(eps - eta * (r_t - opts.target_accept), eps_min, eps_max);
    }
  }
  const Eigen::Index kept_n = iterations - trace.burn_in;
  trace.acceptance_rate = kept_n > 0 ? static_cast<double>(accepted_kept) / kept_n
                                     : static_cast<double>(accepted) / iterations;
  trace.tuning = {
      {"eps_final", eps},
      {"leapfrog_steps", std::max(1.0, std::lround(opts.eps_l_product / eps) * 1.0)},
      {"divergences", static_cast<double>(divergences)},
      {"overall_acceptance", static_cast<double>(accepted) / iterations}};
  return trace;
}

ChainTrace hmc(const PosteriorTarget& t, const GaussianApprox& q_calib,
               Eigen::Index iterations, std::uint64_t seed, const HmcOptions& opts) {
  return hmc_generic(
      [&t](const Eigen::VectorXd& b) { return t.log_posterior(b); },
      [&t](const Eigen::VectorXd& b) { return t.potential_grad(b); }, t.dim(),
      q_calib, iterations, seed, opts);
}

}  // namespace binreg
