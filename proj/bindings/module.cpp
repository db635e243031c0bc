#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "binreg/dataset.hpp"
#include "binreg/ep.hpp"
#include "binreg/gibbs.hpp"
#include "binreg/golden.hpp"
#include "binreg/importance.hpp"
#include "binreg/laplace.hpp"
#include "binreg/metrics.hpp"
#include "binreg/smc.hpp"
#include "binreg/sobol.hpp"
#include "binreg/synth.hpp"
#include "binreg/varsel.hpp"

namespace py = pybind11;
using namespace binreg;

namespace {

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd x,
                     std::vector<std::string> names, bool intercept) {
  Dataset d;
  d.y = std::move(y);
  d.X = std::move(x);
  if (names.empty())
    for (Eigen::Index j = 0; j < d.X.cols(); ++j)
      names.push_back("x" + std::to_string(j));
  d.column_names = std::move(names);
  if (intercept) d.intercept_column = 0;
  d.validate();
  return d;
}

PosteriorTarget make_target(const Dataset& d, const std::string& prior,
                            const std::string& link) {
  const PriorKind pk = prior == "cauchy" ? PriorKind::Cauchy : PriorKind::Gaussian;
  const LinkKind lk = link == "logit" ? LinkKind::Logit : LinkKind::Probit;
  return PosteriorTarget(d, Prior::weakly_informative(pk, d), LinkModel{lk});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian binary regression: Laplace/EP approximations, IS/RQMC, "
            "MCMC, SMC, variable selection";

  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<NumericalError>(m, "NumericalError");

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("y"), py::arg("X"),
           py::arg("column_names") = std::vector<std::string>{},
           py::arg("intercept") = false)
      .def_readonly("y", &Dataset::y)
      .def_readonly("X", &Dataset::X)
      .def_readonly("column_names", &Dataset::column_names)
      .def_readonly("standardized", &Dataset::standardized)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("p", &Dataset::p);
  m.def("ingest_csv", &ingest_csv, py::arg("path"), py::arg("label_column") = "",
        py::arg("intercept") = true);
  m.def("standardize", &standardize);
  m.def("synth_dataset", [](Eigen::Index n, Eigen::Index p, std::uint64_t seed,
                            const std::string& link, double correlation,
                            double signal, int sparse, int binary_columns) {
          SynthSpec spec;
          spec.rows = n;
          spec.covariates = p;
          spec.seed = seed;
          spec.link = link == "logit" ? LinkKind::Logit : LinkKind::Probit;
          spec.correlation = correlation;
          spec.signal_scale = signal;
          spec.sparse_nonzero = sparse;
          spec.binary_columns = binary_columns;
          return synth_dataset(spec);
        },
        py::arg("n"), py::arg("p"), py::arg("seed") = 1, py::arg("link") = "probit",
        py::arg("correlation") = 0.3, py::arg("signal") = 1.0,
        py::arg("sparse") = -1, py::arg("binary_columns") = 0);
  m.def("builtin_dataset", &builtin_dataset);

  py::class_<PosteriorTarget>(m, "PosteriorTarget")
      .def(py::init(&make_target), py::arg("dataset"), py::arg("prior") = "gaussian",
           py::arg("link") = "probit")
      .def_property_readonly("dim", &PosteriorTarget::dim)
      .def("log_likelihood", &PosteriorTarget::log_likelihood)
      .def("log_posterior", &PosteriorTarget::log_posterior)
      .def("log_posterior_with_derivatives",
           [](const PosteriorTarget& t, const Eigen::VectorXd& beta) {
             auto d = t.log_posterior_with_derivatives(beta);
             return py::make_tuple(d.value, d.grad, d.hess);
           });

  py::class_<GaussianApprox>(m, "GaussianApprox")
      .def_property_readonly("mean", &GaussianApprox::mean)
      .def_property_readonly("cov", &GaussianApprox::cov)
      .def_property_readonly("log_evidence",
                             [](const GaussianApprox& g) { return g.log_evidence; })
      .def_static("from_moments", &GaussianApprox::from_moments);

  py::class_<MapResult>(m, "MapResult")
      .def_readonly("beta_map", &MapResult::beta_map)
      .def_readonly("converged", &MapResult::converged)
      .def_readonly("iterations", &MapResult::iterations)
      .def_readonly("gradient_norm", &MapResult::gradient_norm);
  m.def("newton_map",
        [](const PosteriorTarget& t) { return newton_map(t); });

  m.def("laplace", [](const PosteriorTarget& t) { return laplace(t); });
  m.def("laplace_em", [](const PosteriorTarget& t) {
    auto r = laplace_em(t);
    return py::make_tuple(r.approx, r.sigma2, r.converged);
  });
  m.def("improved_laplace_marginal",
        [](const PosteriorTarget& t, Eigen::Index j, int points, double span) {
          MarginalGridSpec spec{points, span};
          const MarginalCurve c = improved_laplace_marginal(t, j, spec);
          return py::make_tuple(c.grid, c.density);
        },
        py::arg("target"), py::arg("component"), py::arg("points") = 64,
        py::arg("span") = 5.0);
  m.def("ep_fit",
        [](const PosteriorTarget& t, const std::string& schedule, double damping) {
          EpOptions opts;
          opts.schedule = schedule == "parallel" ? EpSchedule::Parallel
                                                 : EpSchedule::Sequential;
          opts.damping = damping;
          auto r = ep_fit(t, opts);
          return py::make_tuple(r.approx, r.state.converged, r.state.sweep_count);
        },
        py::arg("target"), py::arg("schedule") = "sequential",
        py::arg("damping") = 1.0);

  py::class_<WeightedSample>(m, "WeightedSample")
      .def_readonly("points", &WeightedSample::points)
      .def_readonly("log_weights", &WeightedSample::log_weights)
      .def_readonly("log_evidence_estimate", &WeightedSample::log_evidence_estimate)
      .def_readonly("ef", &WeightedSample::ef)
      .def("mean", &weighted_mean)
      .def("variance", &weighted_variance);
  m.def("importance_sample", &importance_sample, py::arg("proposal"),
        py::arg("target"), py::arg("n"), py::arg("seed") = 1, py::arg("threads") = 1);
  m.def("rqmc_importance_sample",
        [](const GaussianApprox& q, const PosteriorTarget& t, Eigen::Index n,
           int reps, std::uint64_t seed) {
          const RqmcResult r = rqmc_importance_sample(q, t, n, reps, seed);
          return py::make_tuple(r.mean_estimates, r.evidence_estimates,
                                r.mean_variance);
        },
        py::arg("proposal"), py::arg("target"), py::arg("n"),
        py::arg("replications") = 25, py::arg("seed") = 1);

  py::class_<ChainTrace>(m, "ChainTrace")
      .def_readonly("states", &ChainTrace::states)
      .def_readonly("log_post", &ChainTrace::log_post)
      .def_readonly("burn_in", &ChainTrace::burn_in)
      .def_readonly("acceptance_rate", &ChainTrace::acceptance_rate)
      .def("mean", &ChainTrace::mean)
      .def("variance", &ChainTrace::variance);
  m.def("rwmh", &rwmh, py::arg("target"), py::arg("calibration"),
        py::arg("iterations"), py::arg("seed") = 1,
        py::arg("options") = McmcOptions{});
  m.def("hmc",
        [](const PosteriorTarget& t, const GaussianApprox& q, Eigen::Index iters,
           std::uint64_t seed) { return hmc(t, q, iters, seed); },
        py::arg("target"), py::arg("calibration"), py::arg("iterations"),
        py::arg("seed") = 1);
  m.def("gibbs_probit",
        [](const PosteriorTarget& t, Eigen::Index iters, std::uint64_t seed) {
          return gibbs_probit(t, iters, seed);
        },
        py::arg("target"), py::arg("iterations"), py::arg("seed") = 1);

  py::class_<McmcOptions>(m, "McmcOptions").def(py::init<>());

  py::class_<ParticleSystem>(m, "ParticleSystem")
      .def_readonly("particles", &ParticleSystem::particles)
      .def_readonly("log_weights", &ParticleSystem::log_weights)
      .def_readonly("ladder", &ParticleSystem::ladder)
      .def_readonly("log_evidence_estimate", &ParticleSystem::log_evidence_estimate)
      .def("mean", &ParticleSystem::mean);
  m.def("temper_smc",
        [](const GaussianApprox& q, const PosteriorTarget& t, Eigen::Index n,
           std::uint64_t seed, double tau, int move_steps, int threads) {
          SmcOptions opts;
          opts.tau = tau;
          opts.move_steps = move_steps;
          opts.threads = threads;
          return temper_smc(q, t, n, seed, opts);
        },
        py::arg("proposal"), py::arg("target"), py::arg("n"), py::arg("seed") = 1,
        py::arg("tau") = 0.5, py::arg("move_steps") = 3, py::arg("threads") = 1);

  m.def("enumerate_varsel",
        [](const PosteriorTarget& t, const std::string& evidence,
           Eigen::Index n_inner, std::uint64_t seed) {
          const VarselContext ctx = VarselContext::from_target(t);
          EvidenceSpec spec;
          spec.method = evidence == "laplace" ? EvidenceMethod::Laplace
                        : evidence == "ep"   ? EvidenceMethod::Ep
                                             : EvidenceMethod::ImportanceSampling;
          spec.n_inner = n_inner;
          const EnumerationResult r = enumerate_varsel(ctx, spec, seed);
          return py::make_tuple(r.inclusion, r.posterior_prob, r.log_evidence);
        },
        py::arg("target"), py::arg("evidence") = "is", py::arg("n_inner") = 512,
        py::arg("seed") = 1);
  m.def("binary_smc_varsel",
        [](const PosteriorTarget& t, Eigen::Index n, const std::string& evidence,
           Eigen::Index n_inner, std::uint64_t seed, int threads) {
          const VarselContext ctx = VarselContext::from_target(t);
          EvidenceSpec spec;
          spec.method = evidence == "laplace" ? EvidenceMethod::Laplace
                        : evidence == "ep"   ? EvidenceMethod::Ep
                                             : EvidenceMethod::ImportanceSampling;
          spec.n_inner = n_inner;
          BinarySmcOptions opts;
          opts.threads = threads;
          const GammaParticleSystem sys = binary_smc_varsel(ctx, n, spec, seed, opts);
          return py::make_tuple(sys.inclusion, sys.ladder,
                                sys.log_evidence_estimate);
        },
        py::arg("target"), py::arg("n"), py::arg("evidence") = "is",
        py::arg("n_inner") = 512, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def("marginal_accuracy",
        [](const Eigen::VectorXd& grid_q, const Eigen::VectorXd& dens_q,
           const Eigen::VectorXd& grid_ref, const Eigen::VectorXd& dens_ref) {
          return marginal_accuracy(GridDensity{grid_q, dens_q},
                                   GridDensity{grid_ref, dens_ref});
        });
  m.def("iris", &iris, py::arg("mse_m"), py::arg("cpu_m"), py::arg("mse_is"),
        py::arg("cpu_is"));

  py::class_<SobolSequence>(m, "SobolSequence")
      .def(py::init<int>())
      .def("points", &SobolSequence::points)
      .def("scrambled_points", &SobolSequence::scrambled_points);
}
