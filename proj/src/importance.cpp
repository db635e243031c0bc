#include "binreg/importance.hpp"

#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/parallel.hpp"
#include "binreg/sobol.hpp"
#include "binreg/special.hpp"

namespace binreg {

Eigen::VectorXd WeightedSample::normalized_weights() const {
  const double m = log_weights.maxCoeff();
  Eigen::VectorXd w = (log_weights.array() - m).exp();
  return w / w.sum();
}

double effective_sample_size(const Eigen::VectorXd& log_weights) {
  const double m = log_weights.maxCoeff();
  if (!std::isfinite(m)) return 0.0;
  const Eigen::ArrayXd w = (log_weights.array() - m).exp();
  const double s1 = w.sum(), s2 = w.square().sum();
  return s1 * s1 / s2;
}

namespace {

WeightedSample finish_sample(Eigen::MatrixXd points, const GaussianApprox& q,
                             const PosteriorTarget& t, int threads) {
  const Eigen::Index n = points.rows();
  WeightedSample ws;
  ws.log_weights.resize(n);
  parallel_for(n, threads, [&](std::int64_t i) {
    const Eigen::VectorXd beta = points.row(i).transpose();
    ws.log_weights[i] = t.log_posterior(beta) - q.log_density(beta);
  });
  ws.points = std::move(points);
  ws.log_evidence_estimate =
      logsumexp({ws.log_weights.data(), static_cast<std::size_t>(n)}) -
      std::log(static_cast<double>(n));
  ws.ef = effective_sample_size(ws.log_weights) / static_cast<double>(n);
  return ws;
}

}  // namespace

WeightedSample importance_sample(const GaussianApprox& q, const PosteriorTarget& t,
                                 Eigen::Index n, std::uint64_t seed, int threads) {
  if (n < 2) throw ValidationError("importance_sample: need N >= 2");
  RngStream root(seed);
  return finish_sample(q.sample_matrix(root, n), q, t, threads);
}

EstimateWithSe self_normalized_estimate(
    const WeightedSample& ws,
    const std::function<double(const Eigen::VectorXd&)>& phi) {
  const Eigen::VectorXd w = ws.normalized_weights();
  if (!(w.maxCoeff() > 0.0))
    throw NumericalError("self_normalized_estimate: all weights are zero");
  double est = 0.0;
  Eigen::VectorXd vals(ws.size());
  for (Eigen::Index i = 0; i < ws.size(); ++i) {
    vals[i] = phi(ws.points.row(i).transpose());
    est += w[i] * vals[i];
  }
  // Delta-method plug-in for the self-normalized estimator:
  // se^2 = sum_n W_n^2 (phi_n - est)^2.
  double var = 0.0;
  for (Eigen::Index i = 0; i < ws.size(); ++i)
    var += w[i] * w[i] * (vals[i] - est) * (vals[i] - est);
  return {est, std::sqrt(var)};
}

Eigen::VectorXd weighted_mean(const WeightedSample& ws) {
  const Eigen::VectorXd w = ws.normalized_weights();
  return ws.points.transpose() * w;
}

Eigen::VectorXd weighted_variance(const WeightedSample& ws) {
  const Eigen::VectorXd w = ws.normalized_weights();
  const Eigen::VectorXd mean = ws.points.transpose() * w;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(ws.points.cols());
  for (Eigen::Index i = 0; i < ws.size(); ++i) {
    const Eigen::VectorXd d = ws.points.row(i).transpose() - mean;
    var += w[i] * d.cwiseProduct(d);
  }
  return var;
}

RqmcResult rqmc_importance_sample(const GaussianApprox& q, const PosteriorTarget& t,
                                  Eigen::Index n, int replications, std::uint64_t seed,
                                  int threads) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw ValidationError("rqmc_importance_sample: N must be a power of two");
  if (replications < 8)
    throw ValidationError("rqmc_importance_sample: need R >= 8 replications");
  const Eigen::Index p = q.dim();
  const SobolSequence sobol(static_cast<int>(p));

  RqmcResult res;
  res.mean_estimates.resize(replications, p);
  res.evidence_estimates.resize(replications);
  RngStream root(seed);
  for (int r = 0; r < replications; ++r) {
    const std::uint64_t rep_seed = root.substream(static_cast<std::uint64_t>(r)).key();
    const Eigen::MatrixXd u = sobol.scrambled_points(n, rep_seed);
    Eigen::MatrixXd pts(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd z(p);
      for (Eigen::Index j = 0; j < p; ++j) z[j] = norm_quantile(u(i, j));
      pts.row(i) = (q.mean() + q.chol_cov() * z).transpose();
    }
    WeightedSample ws = finish_sample(std::move(pts), q, t, threads);
    res.mean_estimates.row(r) = weighted_mean(ws).transpose();
    res.evidence_estimates[r] = ws.log_evidence_estimate;
    res.replications.push_back(std::move(ws));
  }

  res.mean_variance.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::ArrayXd col = res.mean_estimates.col(j).array();
    res.mean_variance[j] = (col - col.mean()).square().sum() / (replications - 1);
  }
  const Eigen::ArrayXd z = res.evidence_estimates.array().exp();
  res.evidence_variance = (z - z.mean()).square().sum() / (replications - 1);
  return res;
}

}  // namespace binreg
