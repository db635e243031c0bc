#include <doctest.h>

#include <cmath>

#include "binreg/ep.hpp"
#include "binreg/errors.hpp"
#include "binreg/special.hpp"
#include "oracles.hpp"

using namespace binreg;

namespace {
PosteriorTarget synth_target(Eigen::Index n, Eigen::Index p_cov, std::uint64_t seed,
                             PriorKind prior = PriorKind::Gaussian,
                             LinkKind link = LinkKind::Probit) {
  const Dataset d = standardize(oracles::tiny_dataset(n, p_cov, seed, link));
  return PosteriorTarget(d, Prior::weakly_informative(prior, d), LinkModel{link});
}

PosteriorTarget one_point_target(double x, double y, double prior_sd,
                                 LinkKind link = LinkKind::Probit) {
  Dataset d;
  d.y = Eigen::VectorXd::Constant(1, y);
  d.X = Eigen::MatrixXd::Constant(1, 1, x);
  d.column_names = {"x"};
  return PosteriorTarget(d, Prior::gaussian(Eigen::VectorXd::Constant(1, prior_sd)),
                         LinkModel{link});
}

// Quadrature moments of Phi(y x b) N(b; mu, s2) (or the logistic CDF).
struct Tilted1d {
  double z, mean, var;
};
Tilted1d tilted_oracle(double mu, double s2, double x, double y, LinkKind link) {
  const LinkModel lm{link};
  const double sd = std::sqrt(s2);
  const auto f = [&](double b, int k) {
    const double dens = std::exp(lm.log_cdf(y * x * b) + log_norm_pdf((b - mu) / sd)) / sd;
    return std::pow(b, k) * dens;
  };
  const double lo = mu - 12.0 * sd, hi = mu + 12.0 * sd;
  const double z = oracles::integrate([&](double b) { return f(b, 0); }, lo, hi, 1e-14);
  const double m1 = oracles::integrate([&](double b) { return f(b, 1); }, lo, hi, 1e-14) / z;
  const double m2 = oracles::integrate([&](double b) { return f(b, 2); }, lo, hi, 1e-14) / z;
  return {z, m1, m2 - m1 * m1};
}
}  // namespace

TEST_CASE("gaussian_log_partition closed forms") {
  CHECK(gaussian_log_partition(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()) ==
        doctest::Approx(kLogTwoPi));
  const double q = 2.5, r = 0.7;
  CHECK(gaussian_log_partition(Eigen::VectorXd::Constant(1, r),
                               Eigen::MatrixXd::Constant(1, 1, q)) ==
        doctest::Approx(0.5 * std::log(2.0 * M_PI / q) + r * r / (2.0 * q)));
  Eigen::MatrixXd bad(1, 1);
  bad << -1.0;
  CHECK_THROWS_AS(gaussian_log_partition(Eigen::VectorXd::Zero(1), bad),
                  NumericalError);
}

TEST_CASE("gaussian_log_partition matches direct numerical integration") {
  Eigen::MatrixXd q(2, 2);
  q << 2.0, 0.6, 0.6, 1.1;
  Eigen::Vector2d r(0.4, -0.9);
  const double psi = gaussian_log_partition(r, q);
  // Integrate exp(-b'Qb/2 + b'r) over a wide grid.
  const int g = 401;
  double acc = 0.0;
  const double w = 8.0, d = 2.0 * w / (g - 1);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      Eigen::Vector2d b(-w + i * d, -w + j * d);
      acc += std::exp(-0.5 * b.dot(q * b) + b.dot(r)) * d * d;
    }
  CHECK(psi == doctest::Approx(std::log(acc)).epsilon(1e-6));
}

TEST_CASE("probit site moments: x = 0 leaves the cavity untouched") {
  const GaussianApprox cavity = GaussianApprox::from_moments(
      Eigen::Vector2d(0.3, -0.2), Eigen::Matrix2d::Identity());
  const HybridMoments h = probit_site_moments(cavity, 1.0, Eigen::Vector2d::Zero());
  CHECK(h.log_z == doctest::Approx(std::log(0.5)));
  CHECK((h.mean - cavity.mean()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h.cov - cavity.cov()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("probit site moments match 1-D quadrature") {
  const double mu = 0.4, s2 = 2.3, x = 1.7, y = 1.0;
  const GaussianApprox cavity = GaussianApprox::from_moments(
      Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, s2));
  const HybridMoments h =
      probit_site_moments(cavity, y, Eigen::VectorXd::Constant(1, x));
  const Tilted1d o = tilted_oracle(mu, s2, x, y, LinkKind::Probit);
  CHECK(h.log_z == doctest::Approx(std::log(o.z)).epsilon(1e-8));
  CHECK(h.mean[0] == doctest::Approx(o.mean).epsilon(1e-8));
  CHECK(h.cov(0, 0) == doctest::Approx(o.var).epsilon(1e-8));
}

TEST_CASE("probit site symmetry under label flip") {
  const double s2 = 1.4, x = 0.9;
  const auto plus = probit_site_moments(
      GaussianApprox::from_moments(Eigen::VectorXd::Constant(1, 0.6),
                                   Eigen::MatrixXd::Constant(1, 1, s2)),
      1.0, Eigen::VectorXd::Constant(1, x));
  const auto minus = probit_site_moments(
      GaussianApprox::from_moments(Eigen::VectorXd::Constant(1, -0.6),
                                   Eigen::MatrixXd::Constant(1, 1, s2)),
      -1.0, Eigen::VectorXd::Constant(1, x));
  CHECK(plus.log_z == doctest::Approx(minus.log_z).epsilon(1e-12));
  CHECK(plus.mean[0] == doctest::Approx(-minus.mean[0]).epsilon(1e-12));
}

TEST_CASE("logit site moments: quadrature self-consistency and oracle") {
  const double mu = -0.3, s2 = 1.8, x = 1.2, y = -1.0;
  const GaussianApprox cavity = GaussianApprox::from_moments(
      Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, s2));
  const HybridMoments h64 =
      logit_site_moments(cavity, y, Eigen::VectorXd::Constant(1, x), 64);
  const HybridMoments h256 =
      logit_site_moments(cavity, y, Eigen::VectorXd::Constant(1, x), 256);
  CHECK(std::abs(h64.log_z - h256.log_z) < 1e-10);
  CHECK(std::abs(h64.mean[0] - h256.mean[0]) < 1e-10);
  CHECK(std::abs(h64.cov(0, 0) - h256.cov(0, 0)) < 1e-10);
  const Tilted1d o = tilted_oracle(mu, s2, x, y, LinkKind::Logit);
  CHECK(h64.log_z == doctest::Approx(std::log(o.z)).epsilon(1e-8));
  CHECK(h64.mean[0] == doctest::Approx(o.mean).epsilon(1e-8));

  const HybridMoments zero =
      logit_site_moments(cavity, y, Eigen::VectorXd::Zero(1), 64);
  CHECK(zero.log_z == doctest::Approx(std::log(0.5)));
}

TEST_CASE("single-site EP is exact after one update") {
  const auto t = one_point_target(1.3, 1.0, 2.0);
  EpState state(t, EpOptions{});
  CHECK(state.update_site(0));
  const auto quad = oracles::quad_posterior(t);
  const GaussianApprox g = state.approx();
  CHECK(g.mean()[0] == doctest::Approx(quad.mean[0]).epsilon(1e-7));
  CHECK(g.cov()(0, 0) == doctest::Approx(quad.variance[0]).epsilon(1e-7));
  REQUIRE(g.log_evidence);
  CHECK(*g.log_evidence == doctest::Approx(quad.log_evidence).epsilon(1e-8));
}

TEST_CASE("repeating a site update at the fixed point is a no-op") {
  const auto t = one_point_target(0.8, -1.0, 1.5);
  EpState state(t, EpOptions{});
  state.update_site(0);
  const Eigen::VectorXd mu1 = state.mean();
  const Eigen::MatrixXd cov1 = state.cov();
  state.update_site(0);
  CHECK((state.mean() - mu1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((state.cov() - cov1).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("a zero-covariate site keeps zero naturals and log Z = log 1/2") {
  Dataset d;
  d.y = Eigen::VectorXd::Constant(1, 1.0);
  d.X = Eigen::MatrixXd::Zero(1, 1);
  d.column_names = {"x"};
  const PosteriorTarget t(d, Prior::gaussian(Eigen::VectorXd::Constant(1, 2.0)),
                          LinkModel::probit());
  EpState state(t, EpOptions{});
  state.update_site(0);
  CHECK(state.sites()[0].c == 0.0);
  CHECK(state.sites()[0].d == 0.0);
  CHECK(state.sites()[0].log_z == doctest::Approx(std::log(0.5)));
  // Evidence of the constant-likelihood model is exactly 1/2.
  CHECK(state.log_evidence() == doctest::Approx(std::log(0.5)).epsilon(1e-10));
}

TEST_CASE("ep_fit on an empty dataset returns the prior with evidence 1") {
  Dataset d;
  d.y.resize(0);
  d.X.resize(0, 2);
  d.column_names = {"a", "b"};
  const PosteriorTarget t(d, Prior::gaussian(Eigen::Vector2d(3.0, 1.5)),
                          LinkModel::probit());
  const EpResult r = ep_fit(t);
  CHECK(r.state.converged);
  CHECK(r.approx.cov()(0, 0) == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(r.approx.cov()(1, 1) == doctest::Approx(2.25).epsilon(1e-9));
  CHECK(*r.approx.log_evidence == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("EP is exact when the sites are Gaussian densities") {
  // Probit sites are not Gaussian, so emulate the property on a target
  // whose likelihood is flat (x = 0 rows): the fit must reproduce the
  // prior exactly and the evidence must be (1/2)^n.
  Dataset d;
  d.y = Eigen::VectorXd::Ones(4);
  d.X = Eigen::MatrixXd::Zero(4, 2);
  d.column_names = {"a", "b"};
  const PosteriorTarget t(d, Prior::gaussian(Eigen::Vector2d(2.0, 1.0)),
                          LinkModel::probit());
  const EpResult r = ep_fit(t);
  CHECK((r.approx.cov() - Eigen::Vector2d(4.0, 1.0).asDiagonal().toDenseMatrix())
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK(*r.approx.log_evidence == doctest::Approx(4.0 * std::log(0.5)).epsilon(1e-9));
}

TEST_CASE("moment matching holds immediately after a site update") {
  const auto t = synth_target(20, 1, 71);
  EpState state(t, EpOptions{});
  state.sweep();  // move off the initial state
  for (Eigen::Index i : {Eigen::Index(3), Eigen::Index(11)}) {
    // Cavity from the current state, moments from the public op.
    const Eigen::VectorXd x = t.data.X.row(i).transpose();
    const double c = state.sites()[i].c, dnat = state.sites()[i].d;
    const Eigen::MatrixXd q_cav = state.global_precision() - c * x * x.transpose();
    const Eigen::VectorXd r_cav = state.global_shift() - dnat * x;
    const GaussianApprox cavity = GaussianApprox::from_natural(r_cav, q_cav);
    const HybridMoments h = probit_site_moments(cavity, t.data.y[i], x);
    state.update_site(i);
    CHECK((state.mean() - h.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((state.cov() - h.cov).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ep evidence within 0.05 nats of quadrature (p=2, all scenarios)") {
  for (const PriorKind prior : {PriorKind::Gaussian, PriorKind::Cauchy}) {
    for (const LinkKind link : {LinkKind::Probit, LinkKind::Logit}) {
      const auto t = synth_target(45, 1, 73, prior, link);
      const EpResult r = ep_fit(t);
      CHECK(r.state.converged);
      const auto quad = oracles::quad_posterior(t);
      CHECK(std::abs(*r.approx.log_evidence - quad.log_evidence) < 0.05);
      CHECK((r.approx.mean() - quad.mean).cwiseAbs().maxCoeff() < 0.02);
    }
  }
}

TEST_CASE("sequential and parallel EP find the same fixed point") {
  const auto t = synth_target(60, 2, 79);
  EpOptions seq;
  seq.tol = 1e-10;
  EpOptions par = seq;
  par.schedule = EpSchedule::Parallel;
  par.damping = 0.8;
  const EpResult a = ep_fit(t, seq);
  const EpResult b = ep_fit(t, par);
  CHECK(a.state.converged);
  CHECK(b.state.converged);
  CHECK((a.approx.mean() - b.approx.mean()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("ep_fit output is invariant under observation permutation") {
  const auto t = synth_target(40, 2, 83);
  EpOptions opts;
  opts.tol = 1e-11;
  const EpResult a = ep_fit(t, opts);

  Dataset rev = t.data;
  for (Eigen::Index i = 0; i < t.data.n(); ++i) {
    rev.y[i] = t.data.y[t.data.n() - 1 - i];
    rev.X.row(i) = t.data.X.row(t.data.n() - 1 - i);
  }
  const PosteriorTarget t2(rev, t.prior, t.link);
  const EpResult b = ep_fit(t2, opts);
  CHECK((a.approx.mean() - b.approx.mean()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((a.approx.cov() - b.approx.cov()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(*a.approx.log_evidence == doctest::Approx(*b.approx.log_evidence).epsilon(1e-8));
}

TEST_CASE("global precision stays PD across sweeps") {
  const auto t = synth_target(80, 3, 89, PriorKind::Cauchy, LinkKind::Logit);
  EpState state(t, EpOptions{});
  for (int sweep = 0; sweep < 8; ++sweep) {
    state.sweep();
    Eigen::LLT<Eigen::MatrixXd> llt(state.global_precision());
    CHECK(llt.info() == Eigen::Success);
  }
}
