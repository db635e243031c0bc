#include "binreg/smc.hpp"

#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/importance.hpp"
#include "binreg/parallel.hpp"
#include "binreg/special.hpp"

namespace binreg {

std::vector<Eigen::Index> ResampleOutcome::ancestors() const {
  std::vector<Eigen::Index> idx;
  idx.reserve(counts.sum());
  for (Eigen::Index n = 0; n < counts.size(); ++n)
    for (int k = 0; k < counts[n]; ++k) idx.push_back(n);
  return idx;
}

ResampleOutcome systematic_resample(const Eigen::VectorXd& weights, Eigen::Index n_out,
                                    RngStream& rng) {
  if ((weights.array() < 0.0).any())
    throw ValidationError("systematic_resample: negative weight");
  const double total = weights.sum();
  if (!(total > 0.0))
    throw NumericalError("systematic_resample: all weights are zero");

  ResampleOutcome out;
  out.counts = Eigen::VectorXi::Zero(weights.size());
  const double u0 = rng.uniform();
  double cum = 0.0;
  Eigen::Index drawn = 0;
  for (Eigen::Index n = 0; n < weights.size() && drawn < n_out; ++n) {
    cum += weights[n] / total;
    // Count grid points (k + u0)/n_out below the running cumulative sum.
    while (drawn < n_out && (drawn + u0) / static_cast<double>(n_out) < cum) {
      ++out.counts[n];
      ++drawn;
    }
  }
  // Guard against cumulative rounding leaving the last slots unassigned.
  while (drawn < n_out) {
    ++out.counts[weights.size() - 1];
    ++drawn;
  }
  return out;
}

namespace {
double ef_at(const Eigen::VectorXd& log_ratio, double expo) {
  const Eigen::VectorXd lw = expo * log_ratio;
  return effective_sample_size(lw) / static_cast<double>(lw.size());
}
}  // namespace

NextTemperature next_temperature(const Eigen::VectorXd& log_ratio, double delta_lo,
                                 double tau) {
  if (!(delta_lo >= 0.0 && delta_lo < 1.0))
    throw ValidationError("next_temperature: delta_lo must be in [0,1)");
  if (!(tau > 0.0 && tau < 1.0))
    throw ValidationError("next_temperature: tau must be in (0,1)");

  NextTemperature res;
  const double ef1 = ef_at(log_ratio, 1.0 - delta_lo);
  if (ef1 >= tau) {
    res.finish = true;
    res.delta = 1.0;
    res.ef = ef1;
    return res;
  }
  double lo = delta_lo, hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (ef_at(log_ratio, mid - delta_lo) >= tau ? lo : hi) = mid;
  }
  res.finish = false;
  res.delta = 0.5 * (lo + hi);
  res.ef = ef_at(log_ratio, res.delta - delta_lo);
  return res;
}

Eigen::VectorXd ParticleSystem::normalized_weights() const {
  const double m = log_weights.maxCoeff();
  Eigen::VectorXd w = (log_weights.array() - m).exp();
  return w / w.sum();
}

Eigen::VectorXd ParticleSystem::mean() const {
  return particles.transpose() * normalized_weights();
}

ParticleSystem temper_smc(const GaussianApprox& q, const PosteriorTarget& t,
                          Eigen::Index n, std::uint64_t seed, const SmcOptions& opts) {
  if (n < 2) throw ValidationError("temper_smc: need at least 2 particles");
  const Eigen::Index p = t.dim();
  const RngStream root(seed);

  // Initial draws use the same substream layout as importance_sample, so a
  // stage-0 finish reproduces plain importance sampling bit for bit.
  Eigen::MatrixXd particles = q.sample_matrix(root, n);
  Eigen::VectorXd log_post(n), log_q(n);
  parallel_for(n, opts.threads, [&](std::int64_t i) {
    const Eigen::VectorXd beta = particles.row(i).transpose();
    log_post[i] = t.log_posterior(beta);
    log_q[i] = q.log_density(beta);
  });
  Eigen::VectorXd log_ratio = log_post - log_q;

  ParticleSystem sys;
  double delta_lo = 0.0;
  int stage = 0;
  for (;;) {
    const NextTemperature nt = next_temperature(log_ratio, delta_lo, opts.tau);
    const Eigen::VectorXd lw_inc = (nt.delta - delta_lo) * log_ratio;
    const double logz_inc =
        logsumexp({lw_inc.data(), static_cast<std::size_t>(n)}) -
        std::log(static_cast<double>(n));
    sys.log_evidence_estimate += logz_inc;
    sys.ladder.push_back(nt.delta);

    SmcStageLog log;
    log.stage = stage;
    log.delta = nt.delta;
    log.ef = nt.ef;
    log.log_evidence_increment = logz_inc;

    if (nt.finish) {
      sys.log_weights = lw_inc;
      sys.stages.push_back(log);
      break;
    }

    // Resample.
    const double m = lw_inc.maxCoeff();
    const Eigen::VectorXd w = (lw_inc.array() - m).exp();
    RngStream rs_rng = root.substream(0x100000000ULL + stage);
    const auto ancestors = systematic_resample(w, n, rs_rng).ancestors();
    Eigen::MatrixXd resampled(n, p);
    Eigen::VectorXd lp_new(n), lq_new(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      resampled.row(i) = particles.row(ancestors[i]);
      lp_new[i] = log_post[ancestors[i]];
      lq_new[i] = log_q[ancestors[i]];
    }
    particles = std::move(resampled);
    log_post = lp_new;
    log_q = lq_new;

    // Move steps: random-walk Metropolis invariant for the bridge
    // pi_delta ~ (1-delta) log q + delta log posterior, with proposal
    // covariance (2.38^2/p) * empirical covariance of the resampled set.
    const double delta = nt.delta;
    double accept_count = 0.0;
    if (opts.move_steps > 0) {
      Eigen::RowVectorXd mean = particles.colwise().mean();
      Eigen::MatrixXd centered = particles.rowwise() - mean;
      Eigen::MatrixXd cov = (centered.transpose() * centered) / double(n - 1);
      const double lambda = 2.38 * 2.38 / static_cast<double>(p);
      Eigen::MatrixXd prop = lambda * cov;
      Eigen::LLT<Eigen::MatrixXd> llt(prop);
      for (int tries = 0; llt.info() != Eigen::Success && tries < 6; ++tries) {
        prop.diagonal().array() += 1e-10 * (1.0 + prop.diagonal().maxCoeff());
        llt.compute(prop);
      }
      if (llt.info() != Eigen::Success)
        throw NumericalError("temper_smc: degenerate particle covariance");
      const Eigen::MatrixXd prop_chol = llt.matrixL();

      std::vector<double> accepts(n, 0.0);
      parallel_for(n, opts.threads, [&](std::int64_t i) {
        RngStream prng = root.substream(0x200000000ULL + stage, i);
        Eigen::VectorXd beta = particles.row(i).transpose();
        double lp = log_post[i], lq = log_q[i];
        Eigen::VectorXd z(p);
        for (int s = 0; s < opts.move_steps; ++s) {
          for (Eigen::Index j = 0; j < p; ++j) z[j] = prng.normal();
          const Eigen::VectorXd cand = beta + prop_chol * z;
          const double lp_c = t.log_posterior(cand);
          const double lq_c = q.log_density(cand);
          const double bridge_diff =
              (1.0 - delta) * (lq_c - lq) + delta * (lp_c - lp);
          if (std::log(prng.uniform()) < bridge_diff) {
            beta = cand;
            lp = lp_c;
            lq = lq_c;
            accepts[i] += 1.0;
          }
        }
        particles.row(i) = beta.transpose();
        log_post[i] = lp;
        log_q[i] = lq;
      });
      for (double a : accepts) accept_count += a;
      log.move_acceptance = accept_count / (double(n) * opts.move_steps);
    }
    sys.stages.push_back(log);

    log_ratio = log_post - log_q;
    delta_lo = delta;
    ++stage;
  }

  sys.particles = std::move(particles);
  return sys;
}

}  // namespace binreg
