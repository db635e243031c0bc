#include "binreg/newton.hpp"

#include <cmath>

#include "binreg/errors.hpp"

namespace binreg {

Eigen::VectorXd ols_fit(const Dataset& d) {
  const Eigen::Index p = d.p();
  if (d.n() == 0) return Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd xtx = d.X.transpose() * d.X;
  const Eigen::VectorXd xty = d.X.transpose() * d.y;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  Eigen::VectorXd beta = ldlt.solve(xty);
  if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
    xtx.diagonal().array() += 1e-8 * (1.0 + xtx.diagonal().maxCoeff());
    beta = xtx.ldlt().solve(xty);
  }
  return beta.allFinite() ? beta : Eigen::VectorXd::Zero(p);
}

MapResult maximize_newton(const Objective& f, Eigen::VectorXd beta,
                          const NewtonOptions& opts) {
  MapResult res;
  ObjectiveDerivs cur = f(beta);
  const Eigen::Index p = beta.size();

  for (int it = 0; it < opts.max_iter; ++it) {
    res.gradient_norm = p == 0 ? 0.0 : cur.grad.template lpNorm<Eigen::Infinity>();
    if (res.gradient_norm <= opts.tol) {
      res.converged = true;
      break;
    }
    ++res.iterations;

    // Solve -H d = grad; shift the Hessian when it is not negative definite
    // (possible with a Cauchy prior).
    Eigen::MatrixXd neg_h = -cur.hess;
    Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cur.hess,
                                                        Eigen::EigenvaluesOnly);
      const double shift = es.eigenvalues().maxCoeff() + 1e-6;
      neg_h = -(cur.hess - shift * Eigen::MatrixXd::Identity(p, p));
      llt.compute(neg_h);
      if (llt.info() != Eigen::Success) break;  // give up; diagnostics below
    }
    const Eigen::VectorXd dir = llt.solve(cur.grad);

    // Halving line search; accept the first ascent step.
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      const Eigen::VectorXd cand = beta + step * dir;
      ObjectiveDerivs next = f(cand);
      if (std::isfinite(next.value) && next.value >= cur.value) {
        beta = cand;
        cur = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  res.gradient_norm = p == 0 ? 0.0 : cur.grad.template lpNorm<Eigen::Infinity>();
  res.converged = res.converged || res.gradient_norm <= opts.tol;
  res.beta_map = std::move(beta);
  res.hessian_at_mode = std::move(cur.hess);
  res.log_posterior = cur.value;
  return res;
}

MapResult newton_map(const PosteriorTarget& t, std::optional<Eigen::VectorXd> init,
                     const NewtonOptions& opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("newton_map: tol must be positive");
  Eigen::VectorXd start;
  if (init) {
    if (!init->allFinite()) throw ValidationError("newton_map: non-finite init");
    start = std::move(*init);
  } else if (t.prior.kind == PriorKind::Cauchy) {
    start = ols_fit(t.data);
  } else {
    start = Eigen::VectorXd::Zero(t.dim());
  }
  return maximize_newton(
      [&t](const Eigen::VectorXd& b) {
        auto d = t.log_posterior_with_derivatives(b);
        return ObjectiveDerivs{d.value, std::move(d.grad), std::move(d.hess)};
      },
      std::move(start), opts);
}

}  // namespace binreg
