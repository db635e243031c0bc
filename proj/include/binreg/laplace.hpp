#pragma once

#include <Eigen/Dense>

#include "binreg/gaussian.hpp"
#include "binreg/model.hpp"
#include "binreg/newton.hpp"

namespace binreg {

/// Gaussian fit at the MAP: mean beta_MAP, precision -H, and the standard
/// evidence approximation attached as log_evidence.
GaussianApprox laplace(const PosteriorTarget& t, const NewtonOptions& opts = {});

/// One posterior marginal on a grid; density is normalized to integrate
/// to 1 by the trapezoid rule.
struct MarginalCurve {
  Eigen::Index component = 0;
  Eigen::VectorXd grid;
  Eigen::VectorXd density;
  int dropped_points = 0;
};

struct MarginalGridSpec {
  int points = 64;
  double span = 5.0;  // +- span * posterior sd around the Laplace mean
};

/// Marginal of component j obtained by re-maximizing the remaining p-1
/// coordinates at every grid point and applying the determinant correction.
MarginalCurve improved_laplace_marginal(const PosteriorTarget& t, Eigen::Index j,
                                        const MarginalGridSpec& grid = {},
                                        const NewtonOptions& opts = {});

struct LaplaceEmResult {
  GaussianApprox approx;
  Eigen::VectorXd sigma2;  // component variances at the EM fixed point
  int iterations = 0;
  bool converged = false;
};

struct LaplaceEmOptions {
  double tol = 1e-8;  // on max |change in sigma_j^2|
  int max_iter = 500;
};

/// EM on the latent component variances of the Cauchy (Student nu=1)
/// prior: the E-step Laplace-approximates p(beta | sigma^2, D) with a
/// single Newton iteration, the M-step maximizes the conditional
/// Inverse-Gamma over each sigma_j^2. Requires a Cauchy-prior target.
LaplaceEmResult laplace_em(const PosteriorTarget& t, const LaplaceEmOptions& opts = {});

}  // namespace binreg
