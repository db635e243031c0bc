#include "binreg/laplace.hpp"

#include <cmath>
#include <vector>

#include "binreg/errors.hpp"
#include "binreg/special.hpp"

namespace binreg {

namespace {

double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("log_det_spd: matrix is not positive definite");
  double ld = 0.0;
  for (Eigen::Index j = 0; j < m.rows(); ++j) ld += 2.0 * std::log(llt.matrixL()(j, j));
  return ld;
}

}  // namespace

GaussianApprox laplace(const PosteriorTarget& t, const NewtonOptions& opts) {
  const MapResult mr = newton_map(t, std::nullopt, opts);
  if (!mr.converged)
    throw NumericalError("laplace: MAP optimization did not converge (grad norm " +
                         std::to_string(mr.gradient_norm) + ")");
  const Eigen::MatrixXd q = -mr.hessian_at_mode;
  const double log_det_q = log_det_spd(q);
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  const Eigen::Index p = t.dim();
  GaussianApprox g = GaussianApprox::from_moments(
      mr.beta_map, llt.solve(Eigen::MatrixXd::Identity(p, p)));
  g.log_evidence = mr.log_posterior + 0.5 * p * kLogTwoPi - 0.5 * log_det_q;
  return g;
}

MarginalCurve improved_laplace_marginal(const PosteriorTarget& t, Eigen::Index j,
                                        const MarginalGridSpec& grid,
                                        const NewtonOptions& opts) {
  const Eigen::Index p = t.dim();
  if (j < 0 || j >= p) throw ValidationError("improved_laplace_marginal: bad component");
  if (grid.points < 2)
    throw ValidationError("improved_laplace_marginal: degenerate grid (need >= 2 points)");

  const GaussianApprox g = laplace(t);
  const double center = g.mean()[j];
  const double sd = std::sqrt(g.cov()(j, j));

  MarginalCurve curve;
  curve.component = j;
  curve.grid.resize(grid.points);
  for (int k = 0; k < grid.points; ++k)
    curve.grid[k] = center + sd * grid.span * (2.0 * k / (grid.points - 1) - 1.0);

  std::vector<double> log_q(grid.points,
                            -std::numeric_limits<double>::infinity());
  std::vector<bool> ok(grid.points, false);

  if (p == 1) {
    for (int k = 0; k < grid.points; ++k) {
      Eigen::VectorXd b(1);
      b[0] = curve.grid[k];
      log_q[k] = t.log_posterior(b);
      ok[k] = true;
    }
  } else {
    // Conditional objective over beta_{-j} with beta_j pinned to v.
    const auto conditional = [&](double v) {
      return [&, v](const Eigen::VectorXd& rest) {
        Eigen::VectorXd full(p);
        Eigen::Index r = 0;
        for (Eigen::Index c = 0; c < p; ++c) full[c] = (c == j) ? v : rest[r++];
        auto d = t.log_posterior_with_derivatives(full);
        ObjectiveDerivs out;
        out.value = d.value;
        out.grad.resize(p - 1);
        out.hess.resize(p - 1, p - 1);
        Eigen::Index ri = 0;
        for (Eigen::Index c = 0; c < p; ++c) {
          if (c == j) continue;
          out.grad[ri] = d.grad[c];
          Eigen::Index ci = 0;
          for (Eigen::Index c2 = 0; c2 < p; ++c2) {
            if (c2 == j) continue;
            out.hess(ri, ci++) = d.hess(c, c2);
          }
          ++ri;
        }
        return out;
      };
    };

    Eigen::VectorXd warm_center(p - 1);
    {
      Eigen::Index r = 0;
      for (Eigen::Index c = 0; c < p; ++c)
        if (c != j) warm_center[r++] = g.mean()[c];
    }
    const auto solve_point = [&](int k, Eigen::VectorXd& warm) {
      MapResult mr = maximize_newton(conditional(curve.grid[k]), warm, opts);
      if (!mr.converged) return;
      Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd(-mr.hessian_at_mode));
      if (llt.info() != Eigen::Success) return;
      double ld = 0.0;
      for (Eigen::Index c = 0; c + 1 < p; ++c) ld += 2.0 * std::log(llt.matrixL()(c, c));
      log_q[k] = mr.log_posterior - 0.5 * ld;
      ok[k] = true;
      warm = mr.beta_map;
    };

    // Sweep outward from the grid center so each point warm-starts from
    // its neighbour's conditional mode.
    int k0 = 0;
    for (int k = 1; k < grid.points; ++k)
      if (std::abs(curve.grid[k] - center) < std::abs(curve.grid[k0] - center)) k0 = k;
    Eigen::VectorXd warm = warm_center;
    for (int k = k0; k < grid.points; ++k) solve_point(k, warm);
    warm = warm_center;
    for (int k = k0 - 1; k >= 0; --k) solve_point(k, warm);
  }

  int kept = 0;
  for (bool b : ok) kept += b;
  curve.dropped_points = grid.points - kept;
  if (kept < 2 || curve.dropped_points > grid.points / 5)
    throw NumericalError("improved_laplace_marginal: " +
                         std::to_string(curve.dropped_points) +
                         " of " + std::to_string(grid.points) + " grid points failed");

  Eigen::VectorXd xs(kept), ld(kept);
  for (int k = 0, r = 0; k < grid.points; ++k) {
    if (!ok[k]) continue;
    xs[r] = curve.grid[k];
    ld[r] = log_q[k];
    ++r;
  }
  const double lmax = ld.maxCoeff();
  Eigen::VectorXd dens = (ld.array() - lmax).exp();
  double z = 0.0;
  for (int k = 0; k + 1 < kept; ++k)
    z += 0.5 * (dens[k] + dens[k + 1]) * (xs[k + 1] - xs[k]);
  if (!(z > 0.0)) throw NumericalError("improved_laplace_marginal: zero mass on grid");
  curve.grid = xs;
  curve.density = dens / z;
  return curve;
}

LaplaceEmResult laplace_em(const PosteriorTarget& t, const LaplaceEmOptions& opts) {
  if (t.prior.kind != PriorKind::Cauchy)
    throw ValidationError("laplace_em: requires a Cauchy-prior target");
  const Eigen::Index p = t.dim();
  const double nu = 1.0;
  const Eigen::VectorXd s = t.prior.scales.array().square();  // InvGamma scale s_j

  Eigen::VectorXd sigma2 = s;
  Eigen::VectorXd beta = ols_fit(t.data);
  Eigen::MatrixXd cov;

  // Surrogate EM objective log p(sigma^2 | D) up to a constant: the Laplace
  // evidence of the conditional model plus the InvGamma(nu/2, s_j nu/2) prior.
  const auto em_objective = [&](const Eigen::VectorXd& sg2, double lap_evidence) {
    double lp = lap_evidence;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double a = 0.5 * nu, b = 0.5 * nu * s[j];
      lp += a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(sg2[j]) - b / sg2[j];
    }
    return lp;
  };

  LaplaceEmResult res;
  double best_obj = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_sigma2 = sigma2, best_beta = beta;

  NewtonOptions single;
  single.max_iter = 1;
  for (int it = 0; it < opts.max_iter; ++it) {
    PosteriorTarget cond(t.data, Prior::gaussian(sigma2.array().sqrt()), t.link);
    const MapResult mr = maximize_newton(
        [&cond](const Eigen::VectorXd& b) {
          auto d = cond.log_posterior_with_derivatives(b);
          return ObjectiveDerivs{d.value, std::move(d.grad), std::move(d.hess)};
        },
        beta, single);
    beta = mr.beta_map;
    Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd(-mr.hessian_at_mode));
    if (llt.info() != Eigen::Success)
      throw NumericalError("laplace_em: conditional Hessian not negative definite");
    cov = llt.solve(Eigen::MatrixXd::Identity(p, p));

    double log_det = 0.0;
    for (Eigen::Index c = 0; c < p; ++c) log_det += 2.0 * std::log(llt.matrixL()(c, c));
    const double lap_ev = mr.log_posterior + 0.5 * p * kLogTwoPi - 0.5 * log_det;
    const double obj = em_objective(sigma2, lap_ev);
    if (obj > best_obj) {
      best_obj = obj;
      best_sigma2 = sigma2;
      best_beta = beta;
    }

    // M-step: conditional InvGamma((nu+1)/2, (nu s_j + E[beta_j^2])/2) mode.
    Eigen::VectorXd next(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double e_b2 = beta[j] * beta[j] + cov(j, j);
      next[j] = (nu * s[j] + e_b2) / (nu + 3.0);
    }
    const double delta = (next - sigma2).cwiseAbs().maxCoeff();
    sigma2 = next;
    res.iterations = it + 1;
    if (delta < opts.tol) {
      res.converged = true;
      break;
    }
  }

  if (!res.converged) {
    sigma2 = best_sigma2;
    beta = best_beta;
  }
  res.sigma2 = sigma2;

  // Final Laplace fit of p(beta | sigma^2*, D).
  PosteriorTarget final_target(t.data, Prior::gaussian(sigma2.array().sqrt()), t.link);
  const MapResult mr = newton_map(final_target, beta);
  Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd(-mr.hessian_at_mode));
  if (llt.info() != Eigen::Success)
    throw NumericalError("laplace_em: final Hessian not negative definite");
  res.approx = GaussianApprox::from_moments(
      mr.beta_map, llt.solve(Eigen::MatrixXd::Identity(p, p)));
  return res;
}

}  // namespace binreg
