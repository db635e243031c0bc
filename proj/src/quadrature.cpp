#include "binreg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "binreg/special.hpp"

namespace binreg {

namespace {
GaussHermite compute_gauss_hermite(int n) {
  // Symmetric tridiagonal Jacobi matrix: zero diagonal, off-diagonal
  // sqrt(k/2). Eigenvalues are the nodes; weights from first eigenvector
  // components scaled by sqrt(pi).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermite gh;
  gh.nodes = es.eigenvalues();
  gh.weights.resize(n);
  const double sqrt_pi = 1.7724538509055160273;
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    gh.weights[k] = sqrt_pi * v0 * v0;
  }
  return gh;
}
}  // namespace

const GaussHermite& gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  static std::map<int, GaussHermite> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
  return it->second;
}

TiltedMoments tilted_moments_1d(const std::function<double(double)>& log_f,
                                double m, double v, int n_nodes) {
  if (!(v > 0.0)) throw std::invalid_argument("tilted_moments_1d: variance must be positive");
  const GaussHermite& gh = gauss_hermite(n_nodes);
  const double scale = std::sqrt(2.0 * v);
  const int n = static_cast<int>(gh.nodes.size());

  // Work relative to the max log-integrand for stability.
  Eigen::VectorXd lg(n), s(n);
  double lmax = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    s[k] = m + scale * gh.nodes[k];
    lg[k] = std::log(gh.weights[k]) + log_f(s[k]);
    lmax = std::max(lmax, lg[k]);
  }
  double z0 = 0.0, z1 = 0.0, z2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = std::exp(lg[k] - lmax);
    z0 += w;
    z1 += w * s[k];
    z2 += w * s[k] * s[k];
  }
  TiltedMoments out;
  const double sqrt_pi = 1.7724538509055160273;
  out.log_mass = lmax + std::log(z0) - std::log(sqrt_pi);
  out.mean = z1 / z0;
  out.var = z2 / z0 - out.mean * out.mean;
  return out;
}

}  // namespace binreg
