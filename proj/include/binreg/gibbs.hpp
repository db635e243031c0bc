#pragma once

#include <Eigen/Dense>

#include "binreg/mcmc.hpp"
#include "binreg/model.hpp"

namespace binreg {

/// Exact draw from N(0,1) conditioned on X > a: inverse CDF through the
/// complementary tail for a <= 6, exponential accept-reject beyond.
double sample_trunc_std_normal_lower(RngStream& rng, double a);

/// Data-augmentation Gibbs sampler for the probit link. Gaussian priors
/// use the conjugate update with the cross-product matrix factored once;
/// Cauchy priors add the per-component scale latents s_j ~ Chi2(1).
/// Exposed as a stepper so tests can inspect the latent state.
class GibbsProbitSampler {
 public:
  GibbsProbitSampler(const PosteriorTarget& t, std::uint64_t seed);

  void step();

  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::VectorXd& latents() const { return z_; }
  const Eigen::VectorXd& scale_latents() const { return s_; }  // Cauchy only

  /// Conditional mean E[beta | z] for the current z (Gaussian prior).
  Eigen::VectorXd conditional_beta_mean() const;

 private:
  const PosteriorTarget* target_;
  RngStream rng_;
  bool cauchy_;
  Eigen::MatrixXd xtx_;
  Eigen::LLT<Eigen::MatrixXd> post_llt_;  // fixed for the Gaussian prior
  Eigen::VectorXd beta_, z_, s_;

  void draw_latents();
  void draw_beta();
  void draw_scales();
};

ChainTrace gibbs_probit(const PosteriorTarget& t, Eigen::Index iterations,
                        std::uint64_t seed, const McmcOptions& opts = {});

}  // namespace binreg
