#include "binreg/varsel.hpp"

#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/ep.hpp"
#include "binreg/importance.hpp"
#include "binreg/laplace.hpp"
#include "binreg/parallel.hpp"
#include "binreg/special.hpp"

namespace binreg {

VarselContext VarselContext::from_target(PosteriorTarget t) {
  VarselContext ctx{std::move(t), {}};
  for (Eigen::Index j = 0; j < ctx.target.dim(); ++j) {
    if (ctx.target.data.intercept_column && j == *ctx.target.data.intercept_column)
      continue;
    ctx.selectable.push_back(j);
  }
  return ctx;
}

std::vector<Eigen::Index> VarselContext::columns_for(const ModelIndicator& gamma) const {
  if (gamma.size() != selectable.size())
    throw ValidationError("varsel: indicator length mismatch");
  std::vector<Eigen::Index> keep;
  if (target.data.intercept_column) keep.push_back(*target.data.intercept_column);
  for (std::size_t j = 0; j < gamma.size(); ++j)
    if (gamma[j]) keep.push_back(selectable[j]);
  return keep;
}

double model_evidence(const VarselContext& ctx, const ModelIndicator& gamma,
                      const EvidenceSpec& spec, std::uint64_t seed) {
  const auto keep = ctx.columns_for(gamma);
  if (keep.empty()) {
    // No parameters at all: p(D | gamma) = prod_i F(0) = 2^-n.
    return static_cast<double>(ctx.target.data.n()) * std::log(0.5);
  }
  const PosteriorTarget sub = ctx.target.restrict_to(keep);
  try {
    switch (spec.method) {
      case EvidenceMethod::Laplace:
        return *laplace(sub).log_evidence;
      case EvidenceMethod::Ep:
        return *ep_fit(sub).approx.log_evidence;
      case EvidenceMethod::ImportanceSampling: {
        const GaussianApprox proposal = laplace(sub);
        return importance_sample(proposal, sub, spec.n_inner, seed)
            .log_evidence_estimate;
      }
    }
  } catch (const NumericalError& e) {
    std::string bits;
    for (auto g : gamma) bits += g ? '1' : '0';
    throw NumericalError("model_evidence failed for gamma=" + bits + ": " + e.what());
  }
  throw ValidationError("model_evidence: unknown method");
}

EnumerationResult enumerate_varsel(const VarselContext& ctx, const EvidenceSpec& spec,
                                   std::uint64_t seed, int threads) {
  const Eigen::Index k = ctx.k();
  if (k > 20)
    throw ValidationError(
        "enumerate_varsel: " + std::to_string(k) +
        " selectable columns exceed the 2^20 cap; use the SMC sampler");
  const std::uint64_t n_models = 1ULL << k;

  EnumerationResult res;
  res.models.resize(n_models);
  res.log_evidence.resize(static_cast<Eigen::Index>(n_models));
  const RngStream root(seed);
  parallel_for(static_cast<std::int64_t>(n_models), threads, [&](std::int64_t m) {
    ModelIndicator gamma(k, 0);
    for (Eigen::Index j = 0; j < k; ++j)
      gamma[j] = (static_cast<std::uint64_t>(m) >> j) & 1ULL;
    res.models[m] = gamma;
    res.log_evidence[m] =
        model_evidence(ctx, gamma, spec, root.substream(m).key());
  });

  // Uniform model prior cancels in the normalization.
  const double lse =
      logsumexp({res.log_evidence.data(), static_cast<std::size_t>(n_models)});
  res.posterior_prob = (res.log_evidence.array() - lse).exp();
  res.inclusion = Eigen::VectorXd::Zero(k);
  for (std::uint64_t m = 0; m < n_models; ++m)
    for (Eigen::Index j = 0; j < k; ++j)
      if (res.models[m][j]) res.inclusion[j] += res.posterior_prob[m];
  return res;
}

namespace {
constexpr double kProbClamp = 1e-4;

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

// Weighted ridge-logistic fit by Newton; responses in {0,1}, design
// [1, gamma_{0..j-1}].
Eigen::VectorXd fit_weighted_logistic(const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd& resp,
                                      const Eigen::VectorXd& w, double ridge) {
  const Eigen::Index d = design.cols();
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(d);
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd eta = design * coef;
    Eigen::VectorXd grad = -2.0 * ridge * coef;
    Eigen::MatrixXd hess = -2.0 * ridge * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd gvec(eta.size()), hvec(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-eta[i]));
      gvec[i] = w[i] * (resp[i] - p);
      hvec[i] = -w[i] * p * (1.0 - p);
    }
    grad.noalias() += design.transpose() * gvec;
    hess.noalias() += design.transpose() * hvec.asDiagonal() * design;
    const Eigen::VectorXd step = (-hess).llt().solve(grad);
    coef += step;
    if (step.cwiseAbs().maxCoeff() < 1e-9) break;
  }
  return coef;
}
}  // namespace

NestedLogisticProposal NestedLogisticProposal::fit(
    const std::vector<ModelIndicator>& particles, const Eigen::VectorXd& weights,
    double ridge) {
  if (particles.empty()) throw ValidationError("nested logistic: no particles");
  const Eigen::Index n = static_cast<Eigen::Index>(particles.size());
  const Eigen::Index k = static_cast<Eigen::Index>(particles.front().size());
  const Eigen::VectorXd w = weights / weights.sum();

  NestedLogisticProposal prop;
  prop.coefs_.resize(k);
  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) design(i, j + 1) = particles[i][j];

  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::VectorXd resp = design.col(j + 1);
    const double mean = resp.dot(w);
    if (mean < kProbClamp || mean > 1.0 - kProbClamp) {
      // Degenerate component: near-deterministic Bernoulli, no regression.
      Eigen::VectorXd c = Eigen::VectorXd::Zero(j + 1);
      const double pc = clamp_prob(mean);
      c[0] = std::log(pc / (1.0 - pc));
      prop.coefs_[j] = c;
      continue;
    }
    prop.coefs_[j] =
        fit_weighted_logistic(design.leftCols(j + 1), resp, w, ridge);
  }
  return prop;
}

double NestedLogisticProposal::conditional_prob(const ModelIndicator& gamma,
                                                Eigen::Index j) const {
  double eta = coefs_[j][0];
  for (Eigen::Index c = 0; c < j; ++c)
    if (gamma[c]) eta += coefs_[j][c + 1];
  return clamp_prob(1.0 / (1.0 + std::exp(-eta)));
}

ModelIndicator NestedLogisticProposal::sample(RngStream& rng) const {
  ModelIndicator gamma(dim(), 0);
  for (Eigen::Index j = 0; j < dim(); ++j)
    gamma[j] = rng.bernoulli(conditional_prob(gamma, j)) ? 1 : 0;
  return gamma;
}

double NestedLogisticProposal::log_pmf(const ModelIndicator& gamma) const {
  if (static_cast<Eigen::Index>(gamma.size()) != dim())
    throw ValidationError("nested logistic: indicator length mismatch");
  double lp = 0.0;
  for (Eigen::Index j = 0; j < dim(); ++j) {
    const double p = conditional_prob(gamma, j);
    lp += gamma[j] ? std::log(p) : std::log1p(-p);
  }
  return lp;
}

GammaParticleSystem binary_smc_varsel(const VarselContext& ctx, Eigen::Index n,
                                      const EvidenceSpec& spec, std::uint64_t seed,
                                      const BinarySmcOptions& opts) {
  const Eigen::Index k = ctx.k();
  const RngStream root(seed);

  GammaParticleSystem sys;
  sys.particles.resize(n);
  sys.cached_log_evidence.resize(n);

  // delta = 0 stage: uniform draws over {0,1}^k, one fresh estimate each.
  parallel_for(n, opts.threads, [&](std::int64_t i) {
    RngStream rng = root.substream(0x100000000ULL, i);
    ModelIndicator gamma(k, 0);
    for (Eigen::Index j = 0; j < k; ++j) gamma[j] = rng.bernoulli(0.5) ? 1 : 0;
    sys.particles[i] = std::move(gamma);
    sys.cached_log_evidence[i] =
        model_evidence(ctx, sys.particles[i], spec, rng.substream(1).key());
  });
  sys.evidence_evaluations += n;

  double delta_lo = 0.0;
  int stage = 0;
  for (;;) {
    const NextTemperature nt = next_temperature(sys.cached_log_evidence, delta_lo,
                                                opts.tau);
    const Eigen::VectorXd lw_inc = (nt.delta - delta_lo) * sys.cached_log_evidence;
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

    const double m = lw_inc.maxCoeff();
    const Eigen::VectorXd w = (lw_inc.array() - m).exp();
    RngStream rs_rng = root.substream(0x200000000ULL + stage);
    const auto ancestors = systematic_resample(w, n, rs_rng).ancestors();
    std::vector<ModelIndicator> resampled(n);
    Eigen::VectorXd cached(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      resampled[i] = sys.particles[ancestors[i]];
      cached[i] = sys.cached_log_evidence[ancestors[i]];
    }
    sys.particles = std::move(resampled);
    sys.cached_log_evidence = cached;

    const NestedLogisticProposal prop = NestedLogisticProposal::fit(
        sys.particles, Eigen::VectorXd::Ones(n));

    // Independent-proposal Metropolis moves with fresh noisy evidence at
    // every proposal (never for the incumbent).
    const double delta = nt.delta;
    std::vector<double> accepts(n, 0.0);
    parallel_for(n, opts.threads, [&](std::int64_t i) {
      RngStream rng = root.substream(0x300000000ULL + stage, i);
      for (int s = 0; s < opts.move_steps; ++s) {
        const ModelIndicator cand = prop.sample(rng);
        const double cand_ev =
            model_evidence(ctx, cand, spec, rng.substream(7919 + s).key());
        const double log_a = delta * (cand_ev - sys.cached_log_evidence[i]) +
                             prop.log_pmf(sys.particles[i]) - prop.log_pmf(cand);
        if (std::log(rng.uniform()) < log_a) {
          sys.particles[i] = cand;
          sys.cached_log_evidence[i] = cand_ev;
          accepts[i] += 1.0;
        }
      }
    });
    sys.evidence_evaluations += static_cast<std::int64_t>(n) * opts.move_steps;
    sys.move_proposals += static_cast<std::int64_t>(n) * opts.move_steps;
    double acc = 0.0;
    for (double a : accepts) acc += a;
    log.move_acceptance = acc / (double(n) * std::max(1, opts.move_steps));
    sys.stages.push_back(log);

    delta_lo = delta;
    ++stage;
  }

  const double mw = sys.log_weights.maxCoeff();
  Eigen::VectorXd wn = (sys.log_weights.array() - mw).exp();
  wn /= wn.sum();
  sys.inclusion = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (sys.particles[i][j]) sys.inclusion[j] += wn[i];
  return sys;
}

GammaGibbsResult gamma_gibbs_varsel(const VarselContext& ctx,
                                    std::int64_t evidence_budget,
                                    const EvidenceSpec& spec, std::uint64_t seed) {
  const Eigen::Index k = ctx.k();
  RngStream rng(seed);
  ModelIndicator gamma(k, 0);
  for (Eigen::Index j = 0; j < k; ++j) gamma[j] = rng.bernoulli(0.5) ? 1 : 0;
  double log_ev = model_evidence(ctx, gamma, spec, rng.substream(0).key());

  GammaGibbsResult res;
  res.inclusion = Eigen::VectorXd::Zero(k);
  res.evidence_evaluations = 1;
  std::int64_t sweeps = 0;
  Eigen::Index site = 0;
  std::int64_t kept = 0;
  while (res.evidence_evaluations < evidence_budget) {
    ModelIndicator cand = gamma;
    cand[site] ^= 1;
    const double cand_ev = model_evidence(
        ctx, cand, spec, rng.substream(1000 + res.evidence_evaluations).key());
    ++res.evidence_evaluations;
    // Uniform prior and symmetric flip proposal cancel.
    if (std::log(rng.uniform()) < cand_ev - log_ev) {
      gamma = cand;
      log_ev = cand_ev;
    }
    site = (site + 1) % k;
    if (site == 0) ++sweeps;
    // Accumulate after a short burn-in measured in full sweeps.
    if (sweeps >= 2) {
      for (Eigen::Index j = 0; j < k; ++j) res.inclusion[j] += gamma[j];
      ++kept;
    }
  }
  if (kept > 0) res.inclusion /= static_cast<double>(kept);
  return res;
}

}  // namespace binreg
