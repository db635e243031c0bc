#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/importance.hpp"
#include "oracles.hpp"

using namespace binreg;

namespace {
PosteriorTarget synth_target(Eigen::Index n, Eigen::Index p_cov, std::uint64_t seed,
                             PriorKind prior = PriorKind::Gaussian,
                             LinkKind link = LinkKind::Probit) {
  const Dataset d = standardize(oracles::tiny_dataset(n, p_cov, seed, link));
  return PosteriorTarget(d, Prior::weakly_informative(prior, d), LinkModel{link});
}

PosteriorTarget prior_only_target(Eigen::Index p, double sd) {
  Dataset d;
  d.y.resize(0);
  d.X.resize(0, p);
  for (Eigen::Index j = 0; j < p; ++j) d.column_names.push_back("x");
  return PosteriorTarget(d, Prior::gaussian(Eigen::VectorXd::Constant(p, sd)),
                         LinkModel::probit());
}
}  // namespace

TEST_CASE("proposal equal to the target gives equal weights, EF 1, log Z 0") {
  const auto t = prior_only_target(3, 2.0);
  const GaussianApprox q = GaussianApprox::from_moments(
      Eigen::VectorXd::Zero(3), 4.0 * Eigen::MatrixXd::Identity(3, 3));
  const WeightedSample ws = importance_sample(q, t, 512, 7);
  CHECK(ws.ef == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ws.log_evidence_estimate == doctest::Approx(0.0).epsilon(1e-10));
  CHECK((ws.log_weights.array() - ws.log_weights[0]).abs().maxCoeff() < 1e-10);
}

TEST_CASE("ESS bounds and the equal-weight equality case") {
  Eigen::VectorXd lw(4);
  lw << -1.0, -1.0, -1.0, -1.0;
  CHECK(effective_sample_size(lw) == doctest::Approx(4.0));
  lw << 0.0, -100.0, -100.0, -100.0;
  const double ess = effective_sample_size(lw);
  CHECK(ess >= 1.0);
  CHECK(ess <= 4.0);
  CHECK(ess == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("IS evidence is unbiased against quadrature (p=2)") {
  const auto t = synth_target(35, 1, 101);
  const auto quad = oracles::quad_posterior(t);
  const GaussianApprox q = [&] {
    // Calibrate from the quadrature moments; the proposal only needs to
    // be sane, not perfect.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = 1.6 * quad.variance[0];
    cov(1, 1) = 1.6 * quad.variance[1];
    return GaussianApprox::from_moments(quad.mean, cov);
  }();
  const int seeds = 200;
  Eigen::VectorXd z(seeds);
  for (int s = 0; s < seeds; ++s)
    z[s] = std::exp(importance_sample(q, t, 256, 1000 + s).log_evidence_estimate -
                    quad.log_evidence);
  const double mean = z.mean();
  const double sd = std::sqrt((z.array() - mean).square().sum() / (seeds - 1));
  CHECK(std::abs(mean - 1.0) <= 3.0 * sd / std::sqrt(double(seeds)));
}

TEST_CASE("posterior mean matches quadrature within 3 standard errors") {
  const auto t = synth_target(40, 1, 103);
  const auto quad = oracles::quad_posterior(t);
  const GaussianApprox q = GaussianApprox::from_moments(
      quad.mean, Eigen::Vector2d(1.5 * quad.variance[0], 1.5 * quad.variance[1])
                     .asDiagonal()
                     .toDenseMatrix());
  const WeightedSample ws = importance_sample(q, t, 16384, 11);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const auto est = self_normalized_estimate(
        ws, [j](const Eigen::VectorXd& b) { return b[j]; });
    CHECK(std::abs(est.estimate - quad.mean[j]) <= 3.0 * est.se + 1e-4);
  }
}

TEST_CASE("self-normalized estimate: constants and equal weights") {
  const auto t = prior_only_target(2, 1.0);
  const GaussianApprox q = GaussianApprox::from_moments(
      Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  const WeightedSample ws = importance_sample(q, t, 256, 3);
  const auto c = self_normalized_estimate(ws, [](const Eigen::VectorXd&) { return 4.2; });
  CHECK(c.estimate == doctest::Approx(4.2));
  CHECK(c.se == doctest::Approx(0.0).epsilon(1e-12));
  const auto m = self_normalized_estimate(ws, [](const Eigen::VectorXd& b) { return b[0]; });
  CHECK(m.estimate == doctest::Approx(ws.points.col(0).mean()).epsilon(1e-9));
}

TEST_CASE("importance sampling draws are independent of the thread count") {
  const auto t = synth_target(30, 2, 107);
  const GaussianApprox q = GaussianApprox::from_moments(
      Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
  const WeightedSample a = importance_sample(q, t, 1024, 5, 1);
  const WeightedSample b = importance_sample(q, t, 1024, 5, 4);
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.log_weights - b.log_weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
  const auto t = prior_only_target(1, 1.0);
  const GaussianApprox q = GaussianApprox::from_moments(
      Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  CHECK_THROWS_AS(importance_sample(q, t, 1, 1), ValidationError);
}
