#include "binreg/golden.hpp"

#include "binreg/ep.hpp"
#include "binreg/errors.hpp"
#include "binreg/gibbs.hpp"
#include "binreg/laplace.hpp"

namespace binreg {

namespace {
ChainTrace golden_chain(const PosteriorTarget& t, Eigen::Index iterations,
                        std::uint64_t seed, std::string& sampler_name) {
  if (t.prior.kind == PriorKind::Gaussian && t.link.kind == LinkKind::Probit) {
    sampler_name = "gibbs";
    return gibbs_probit(t, iterations, seed);
  }
  sampler_name = "rwmh";
  GaussianApprox calib;
  try {
    calib = ep_fit(t).approx;
  } catch (const NumericalError&) {
    calib = laplace(t);
  }
  return rwmh(t, calib, iterations, seed);
}
}  // namespace

GoldenReference build_golden(const PosteriorTarget& t, std::uint64_t seed,
                             const GoldenOptions& opts) {
  GoldenReference ref;
  ref.seed = seed;
  ref.iterations = opts.iterations;

  const ChainTrace chain = golden_chain(t, opts.iterations, seed, ref.sampler);
  ref.mean = chain.mean();
  ref.variance = chain.variance();
  ref.mean_se.resize(t.dim());
  const auto kept = chain.kept();
  for (Eigen::Index j = 0; j < t.dim(); ++j)
    ref.mean_se[j] = batch_means_se(kept.col(j));

  // Fixed evaluation grids from the first run's moments.
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(kept.rows());
  for (Eigen::Index j = 0; j < t.dim(); ++j) {
    const double sd = std::sqrt(ref.variance[j]);
    Eigen::VectorXd grid(opts.grid_points);
    for (int g = 0; g < opts.grid_points; ++g)
      grid[g] = ref.mean[j] +
                sd * opts.grid_span * (2.0 * g / (opts.grid_points - 1) - 1.0);
    ref.marginals.push_back(kde_density(kept.col(j), w, grid).normalized());
  }

  if (opts.validate) {
    std::string unused;
    const ChainTrace second =
        golden_chain(t, opts.iterations, seed + 0x5eed, unused);
    const auto kept2 = second.kept();
    const Eigen::VectorXd w2 = Eigen::VectorXd::Ones(kept2.rows());
    ref.validation_min_ma = 1.0;
    for (Eigen::Index j = 0; j < t.dim(); ++j) {
      const GridDensity other =
          kde_density(kept2.col(j), w2, ref.marginals[j].grid).normalized();
      ref.validation_min_ma =
          std::min(ref.validation_min_ma, marginal_accuracy(other, ref.marginals[j]));
    }
    if (ref.validation_min_ma < opts.validation_threshold)
      throw NumericalError(
          "build_golden: independent runs disagree (min MA = " +
          std::to_string(ref.validation_min_ma) + "); increase the run length");
  }
  return ref;
}

}  // namespace binreg
