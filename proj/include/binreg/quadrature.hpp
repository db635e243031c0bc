#pragma once

#include <Eigen/Dense>
#include <functional>

namespace binreg {

/// Gauss-Hermite rule for integrals against exp(-t^2) (physicists' weight).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Nodes/weights computed by Golub-Welsch; cached per node count.
const GaussHermite& gauss_hermite(int n);

/// Moments of the tilted density h(s) ∝ f(s) N(s; m, v), where log_f is
/// evaluated in log space. Returns {log mass, mean, variance} with the mass
/// relative to the normalized Gaussian, i.e. log ∫ f(s) N(s;m,v) ds.
struct TiltedMoments {
  double log_mass;
  double mean;
  double var;
};
TiltedMoments tilted_moments_1d(const std::function<double(double)>& log_f,
                                double m, double v, int n_nodes);

}  // namespace binreg
