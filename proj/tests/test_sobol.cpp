#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "binreg/errors.hpp"
#include "binreg/importance.hpp"
#include "binreg/sobol.hpp"
#include "oracles.hpp"

using namespace binreg;

TEST_CASE("unscrambled Sobol reproduces the reference sequence") {
  const SobolSequence s(8);
  const Eigen::MatrixXd pts = s.points(16);
  // Frozen from a reference generator built on the same published table.
  CHECK((pts.row(0).array() == 0.0).all());
  CHECK((pts.row(1).array() == 0.5).all());
  const double p2[] = {0.75, 0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75};
  const double p3[] = {0.25, 0.75, 0.75, 0.75, 0.25, 0.25, 0.75, 0.25};
  const double p7[] = {0.125, 0.625, 0.375, 0.125, 0.125, 0.375, 0.625, 0.625};
  const double p15[] = {0.0625, 0.9375, 0.5625, 0.3125,
                        0.6875, 0.1875, 0.8125, 0.3125};
  for (int j = 0; j < 8; ++j) {
    CHECK(pts(2, j) == p2[j]);
    CHECK(pts(3, j) == p3[j]);
    CHECK(pts(7, j) == p7[j]);
    CHECK(pts(15, j) == p15[j]);
  }
}

TEST_CASE("higher dimensions match the reference generator") {
  const SobolSequence s(128);
  const Eigen::MatrixXd pts = s.points(8);
  const double d128_p5_last4[] = {0.375, 0.875, 0.625, 0.125};
  for (int c = 0; c < 4; ++c) CHECK(pts(5, 124 + c) == d128_p5_last4[c]);
  const SobolSequence s64(64);
  const Eigen::MatrixXd p64 = s64.points(8);
  const double d64_p5_last4[] = {0.625, 0.875, 0.375, 0.625};
  for (int c = 0; c < 4; ++c) CHECK(p64(5, 60 + c) == d64_p5_last4[c]);
}

TEST_CASE("dimension beyond the direction table is refused") {
  CHECK_THROWS_AS(SobolSequence(129), ValidationError);
  CHECK_THROWS_AS(SobolSequence(0), ValidationError);
}

TEST_CASE("scrambled coordinates are marginally uniform (KS test)") {
  const Eigen::Index n = 1 << 14;
  const SobolSequence s(4);
  const Eigen::MatrixXd pts = s.scrambled_points(n, 2024);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> u(pts.col(j).data(), pts.col(j).data() + n);
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      ks = std::max(ks, std::abs(u[i] - (i + 1.0) / n));
      ks = std::max(ks, std::abs(u[i] - double(i) / n));
    }
    // alpha = 0.01 critical value ~ 1.63 / sqrt(n).
    CHECK(ks < 1.63 / std::sqrt(double(n)));
    CHECK(u.front() > 0.0);
    CHECK(u.back() < 1.0);
  }
}

TEST_CASE("scrambling preserves the dyadic balance of the net") {
  // Any scrambling keeps each dyadic interval [k 2^-m, (k+1) 2^-m) holding
  // exactly n 2^-m of the first n = 2^m' points (m <= m').
  const Eigen::Index n = 1 << 10;
  const SobolSequence s(3);
  const Eigen::MatrixXd pts = s.scrambled_points(n, 99);
  for (int j = 0; j < 3; ++j) {
    int counts[16] = {0};
    for (Eigen::Index i = 0; i < n; ++i)
      counts[static_cast<int>(pts(i, j) * 16.0)]++;
    for (int b = 0; b < 16; ++b) CHECK(counts[b] == n / 16);
  }
}

TEST_CASE("different seeds give different scrambles, same seed identical") {
  const SobolSequence s(2);
  const Eigen::MatrixXd a = s.scrambled_points(64, 1);
  const Eigen::MatrixXd b = s.scrambled_points(64, 1);
  const Eigen::MatrixXd c = s.scrambled_points(64, 2);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("rqmc guards its preconditions") {
  const Dataset d = standardize(oracles::tiny_dataset(20, 1, 1));
  const PosteriorTarget t(d, Prior::weakly_informative(PriorKind::Gaussian, d),
                          LinkModel::probit());
  const GaussianApprox q = GaussianApprox::from_moments(
      Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(rqmc_importance_sample(q, t, 1000, 16, 1), ValidationError);
  CHECK_THROWS_AS(rqmc_importance_sample(q, t, 1024, 4, 1), ValidationError);
}

TEST_CASE("rqmc beats plain IS on a smooth p=2 posterior") {
  const Dataset d = standardize(oracles::tiny_dataset(40, 1, 109));
  const PosteriorTarget t(d, Prior::weakly_informative(PriorKind::Gaussian, d),
                          LinkModel::probit());
  const auto quad = oracles::quad_posterior(t);
  const GaussianApprox q = GaussianApprox::from_moments(
      quad.mean, Eigen::Vector2d(1.3 * quad.variance[0], 1.3 * quad.variance[1])
                     .asDiagonal()
                     .toDenseMatrix());
  const Eigen::Index n = 1 << 11;
  const int reps = 16;
  const RqmcResult rq = rqmc_importance_sample(q, t, n, reps, 5);
  Eigen::MatrixXd is_means(reps, 2);
  for (int r = 0; r < reps; ++r)
    is_means.row(r) =
        weighted_mean(importance_sample(q, t, n, 900 + r)).transpose();
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double mse_rqmc =
        (rq.mean_estimates.col(j).array() - quad.mean[j]).square().mean();
    const double mse_is = (is_means.col(j).array() - quad.mean[j]).square().mean();
    CHECK(mse_is / mse_rqmc > 2.0);
  }
}
