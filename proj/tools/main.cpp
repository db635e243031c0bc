#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>

#include "binreg/artifacts.hpp"
#include "binreg/bench.hpp"
#include "binreg/ep.hpp"
#include "binreg/errors.hpp"
#include "binreg/gibbs.hpp"
#include "binreg/importance.hpp"
#include "binreg/laplace.hpp"
#include "binreg/smc.hpp"
#include "binreg/synth.hpp"
#include "binreg/varsel.hpp"

namespace {

using namespace binreg;
using nlohmann::json;

struct CommonOpts {
  std::string dataset;
  std::string label_column;
  std::string prior = "gaussian";
  std::string link = "probit";
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
  std::string timings;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_model = true) {
  cmd->add_option("--dataset", o.dataset, "CSV path or builtin name")->required();
  cmd->add_option("--label-column", o.label_column,
                  "label column name (default: first column)");
  if (with_model) {
    cmd->add_option("--prior", o.prior, "gaussian|cauchy")
        ->check(CLI::IsMember({"gaussian", "cauchy"}));
    cmd->add_option("--link", o.link, "probit|logit")
        ->check(CLI::IsMember({"probit", "logit"}));
  }
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--out", o.out, "output path prefix");
  cmd->add_option("--timings", o.timings,
                  "write measured wall/CPU seconds to this JSON file");
}

Dataset load_dataset(const CommonOpts& o) {
  Dataset raw = is_builtin_dataset(o.dataset)
                    ? builtin_dataset(o.dataset)
                    : ingest_csv(o.dataset, o.label_column, true);
  return raw.standardized ? raw : standardize(raw);
}

PosteriorTarget make_target(const CommonOpts& o) {
  const Dataset d = load_dataset(o);
  const PriorKind prior = o.prior == "cauchy" ? PriorKind::Cauchy : PriorKind::Gaussian;
  const LinkKind link = o.link == "logit" ? LinkKind::Logit : LinkKind::Probit;
  return PosteriorTarget(d, Prior::weakly_informative(prior, d), LinkModel{link});
}

GaussianApprox load_calibration(const std::string& spec, const PosteriorTarget& t) {
  if (spec == "ep") return ep_fit(t).approx;
  if (spec == "laplace") return laplace(t);
  if (spec == "prior") {
    Eigen::VectorXd sd = t.prior.scales;
    if (t.prior.kind == PriorKind::Cauchy) sd *= 2.0;  // matched-width Gaussian
    return GaussianApprox::from_moments(
        Eigen::VectorXd::Zero(t.dim()),
        Eigen::MatrixXd(sd.array().square().matrix().asDiagonal()));
  }
  return gaussian_from_json(load_json(spec));
}

struct Stopwatch {
  std::clock_t c0 = std::clock();
  std::chrono::steady_clock::time_point w0 = std::chrono::steady_clock::now();
  void report(const std::string& timings_path) const {
    const double cpu = static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - w0).count();
    if (!timings_path.empty()) {
      json t;
      t["cpu_seconds"] = cpu;
      t["wall_seconds"] = wall;
      save_json(timings_path, t);
    }
    std::cerr << "cpu " << cpu << " s, wall " << wall << " s\n";
  }
};

json base_metadata(const CommonOpts& o) {
  json meta;
  meta["dataset"] = o.dataset;
  meta["prior"] = o.prior;
  meta["link"] = o.link;
  meta["seed"] = o.seed;
  meta["threads"] = o.threads;
  return meta;
}

int cmd_ingest(const CommonOpts& o, bool intercept) {
  Dataset raw = is_builtin_dataset(o.dataset)
                    ? builtin_dataset(o.dataset)
                    : ingest_csv(o.dataset, o.label_column, intercept);
  const Dataset std_d = raw.standardized ? raw : standardize(raw);
  write_dataset_csv(o.out + ".csv", std_d);
  write_transforms_json(o.out + ".transforms.json", std_d);
  std::cout << "n=" << std_d.n() << " p=" << std_d.p() << "\n";
  return 0;
}

int cmd_synth(const std::string& name, const SynthSpec& spec, const std::string& out) {
  const Dataset d = name.empty() ? synth_dataset(spec) : builtin_dataset(name);
  write_dataset_csv(out + ".csv", d);
  std::cout << "n=" << d.n() << " p=" << d.p() << "\n";
  return 0;
}

int cmd_approx(const CommonOpts& o, const std::string& method) {
  const PosteriorTarget t = make_target(o);
  Stopwatch sw;
  if (method == "improved-laplace") {
    for (Eigen::Index j = 0; j < t.dim(); ++j) {
      const MarginalCurve curve = improved_laplace_marginal(t, j);
      write_marginal_curve(o.out + ".marginal" + std::to_string(j) + ".csv", curve);
    }
    const GaussianApprox g = laplace(t);
    save_json(o.out + ".json", gaussian_to_json(g));
  } else {
    GaussianApprox g;
    if (method == "laplace") {
      g = laplace(t);
    } else if (method == "laplace-em") {
      g = laplace_em(t).approx;
    } else if (method == "ep") {
      g = ep_fit(t).approx;
    } else {
      throw ValidationError("approx: unknown method '" + method + "'");
    }
    save_json(o.out + ".json", gaussian_to_json(g));
    if (g.log_evidence) std::cout << "log_evidence " << *g.log_evidence << "\n";
  }
  sw.report(o.timings);
  return 0;
}

int cmd_sample(const CommonOpts& o, const std::string& method, Eigen::Index n,
               const std::string& calib_spec, int replications) {
  const PosteriorTarget t = make_target(o);
  Stopwatch sw;
  json meta = base_metadata(o);
  meta["method"] = method;
  meta["calibration"] = calib_spec;

  if (method == "gibbs") {
    const ChainTrace trace = gibbs_probit(t, n, o.seed);
    write_chain(o.out, trace, meta);
  } else if (method == "rwmh" || method == "hmc") {
    const GaussianApprox calib = load_calibration(calib_spec, t);
    const ChainTrace trace = method == "rwmh" ? rwmh(t, calib, n, o.seed)
                                              : hmc(t, calib, n, o.seed);
    write_chain(o.out, trace, meta);
    std::cout << "acceptance " << trace.acceptance_rate << "\n";
  } else if (method == "is") {
    const GaussianApprox calib = load_calibration(calib_spec, t);
    const WeightedSample ws = importance_sample(calib, t, n, o.seed, o.threads);
    write_weighted_sample(o.out, ws, meta);
    std::cout << "EF " << ws.ef << " log_evidence " << ws.log_evidence_estimate
              << "\n";
  } else if (method == "rqmc") {
    const GaussianApprox calib = load_calibration(calib_spec, t);
    const RqmcResult rq =
        rqmc_importance_sample(calib, t, n, replications, o.seed, o.threads);
    for (std::size_t r = 0; r < rq.replications.size(); ++r) {
      json m = meta;
      m["replication"] = r;
      write_weighted_sample(o.out + ".rep" + std::to_string(r), rq.replications[r],
                            m);
    }
    json summary = meta;
    summary["evidence_variance"] = rq.evidence_variance;
    summary["mean_variance"] = std::vector<double>(
        rq.mean_variance.data(), rq.mean_variance.data() + rq.mean_variance.size());
    save_json(o.out + ".rqmc.json", summary);
  } else if (method == "smc") {
    const GaussianApprox calib = load_calibration(calib_spec, t);
    SmcOptions opts;
    opts.threads = o.threads;
    const ParticleSystem ps = temper_smc(calib, t, n, o.seed, opts);
    write_particles(o.out, ps, meta);
    std::cout << "stages " << ps.stages.size() << " log_evidence "
              << ps.log_evidence_estimate << "\n";
  } else {
    throw ValidationError("sample: unknown method '" + method + "'");
  }
  sw.report(o.timings);
  return 0;
}

int cmd_varsel(const CommonOpts& o, const std::string& mode, Eigen::Index n,
               const std::string& evidence, Eigen::Index n_inner, int top_k) {
  const PosteriorTarget t = make_target(o);
  const VarselContext ctx = VarselContext::from_target(t);
  EvidenceSpec spec;
  spec.n_inner = n_inner;
  if (evidence == "laplace") spec.method = EvidenceMethod::Laplace;
  else if (evidence == "ep") spec.method = EvidenceMethod::Ep;
  else if (evidence == "is") spec.method = EvidenceMethod::ImportanceSampling;
  else throw ValidationError("varsel: unknown evidence method '" + evidence + "'");

  Stopwatch sw;
  json meta = base_metadata(o);
  meta["mode"] = mode;
  meta["evidence"] = evidence;

  Eigen::VectorXd inclusion;
  std::vector<std::pair<double, std::string>> top_models;
  if (mode == "enumerate") {
    const EnumerationResult res = enumerate_varsel(ctx, spec, o.seed, o.threads);
    inclusion = res.inclusion;
    for (std::size_t m = 0; m < res.models.size(); ++m) {
      std::string bits;
      for (auto g : res.models[m]) bits += g ? '1' : '0';
      top_models.emplace_back(res.posterior_prob[m], bits);
    }
  } else if (mode == "smc") {
    BinarySmcOptions opts;
    opts.threads = o.threads;
    const GammaParticleSystem sys = binary_smc_varsel(ctx, n, spec, o.seed, opts);
    inclusion = sys.inclusion;
    meta["stages"] = sys.stages.size();
    meta["evidence_evaluations"] = sys.evidence_evaluations;
    const Eigen::VectorXd w = [&] {
      Eigen::VectorXd lw = sys.log_weights;
      const double m = lw.maxCoeff();
      Eigen::VectorXd e = (lw.array() - m).exp();
      return Eigen::VectorXd(e / e.sum());
    }();
    std::map<std::string, double> mass;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(sys.particles.size());
         ++i) {
      std::string bits;
      for (auto g : sys.particles[i]) bits += g ? '1' : '0';
      mass[bits] += w[i];
    }
    for (const auto& [bits, p] : mass) top_models.emplace_back(p, bits);
  } else {
    throw ValidationError("varsel: mode must be enumerate or smc");
  }

  std::sort(top_models.begin(), top_models.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  std::ofstream inc(o.out + ".inclusion.csv");
  inc << "column,inclusion_probability\n";
  for (Eigen::Index j = 0; j < inclusion.size(); ++j)
    inc << t.data.column_names[ctx.selectable[j]] << ","
        << format_double(inclusion[j]) << "\n";

  std::ofstream top(o.out + ".models.csv");
  top << "model,posterior_mass\n";
  const int k_out = std::min<int>(top_k, top_models.size());
  for (int m = 0; m < k_out; ++m)
    top << top_models[m].second << "," << format_double(top_models[m].first) << "\n";

  save_json(o.out + ".meta.json", meta);
  sw.report(o.timings);
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir,
              const std::string& timings) {
  const BenchConfig cfg = BenchConfig::from_json_file(config_path);
  Stopwatch sw;
  const BenchReport report = run_benchmark(cfg);
  write_report(out_dir, cfg, report);
  int failed = 0;
  for (const auto& c : report.cells) failed += c.failed;
  std::cout << report.cells.size() << " cells, " << failed << " failed\n";
  sw.report(timings);
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian binary regression: approximations, samplers, benchmarks"};
  app.require_subcommand(1);

  CommonOpts ingest_opts;
  bool ingest_intercept = true;
  auto* ingest = app.add_subcommand("ingest", "convert a CSV dataset and standardize");
  add_common(ingest, ingest_opts, false);
  ingest->add_flag("--intercept,!--no-intercept", ingest_intercept,
                   "prepend an intercept column (default on)");

  SynthSpec synth_spec;
  std::string synth_name, synth_out = "out", synth_link = "probit";
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--name", synth_name, "builtin replica name");
  synth->add_option("--n", synth_spec.rows, "rows");
  synth->add_option("--p", synth_spec.covariates, "covariates (excluding intercept)");
  synth->add_option("--seed", synth_spec.seed, "generator seed");
  synth->add_option("--correlation", synth_spec.correlation, "AR(1) correlation");
  synth->add_option("--signal", synth_spec.signal_scale, "signal scale");
  synth->add_option("--sparse", synth_spec.sparse_nonzero, "nonzero coefficients");
  synth->add_option("--binary-columns", synth_spec.binary_columns, "binary columns");
  synth->add_option("--link", synth_link, "probit|logit");
  synth->add_option("--out", synth_out, "output path prefix");

  CommonOpts approx_opts;
  std::string approx_method = "laplace";
  auto* approx = app.add_subcommand("approx", "fit a Gaussian approximation");
  approx->add_option("--method", approx_method,
                     "laplace|improved-laplace|laplace-em|ep")
      ->check(CLI::IsMember({"laplace", "improved-laplace", "laplace-em", "ep"}));
  add_common(approx, approx_opts);

  CommonOpts sample_opts;
  std::string sample_method = "is", sample_calib = "ep";
  Eigen::Index sample_n = 16384;
  int sample_reps = 25;
  auto* sample = app.add_subcommand("sample", "run a sampling algorithm");
  sample->add_option("--method", sample_method, "is|rqmc|rwmh|gibbs|hmc|smc")
      ->check(CLI::IsMember({"is", "rqmc", "rwmh", "gibbs", "hmc", "smc"}));
  sample->add_option("--n", sample_n, "draws / iterations / particles");
  sample->add_option("--calib", sample_calib,
                     "proposal calibration: ep|laplace|prior|<approx.json>");
  sample->add_option("--replications", sample_reps, "RQMC replications");
  add_common(sample, sample_opts);

  CommonOpts varsel_opts;
  std::string varsel_mode = "enumerate", varsel_evidence = "is";
  Eigen::Index varsel_n = 1024, varsel_inner = 512;
  int varsel_topk = 32;
  auto* varsel = app.add_subcommand("varsel", "Bayesian variable selection");
  varsel->add_option("--mode", varsel_mode, "enumerate|smc")
      ->check(CLI::IsMember({"enumerate", "smc"}));
  varsel->add_option("--n", varsel_n, "particles (smc mode)");
  varsel->add_option("--evidence", varsel_evidence, "laplace|ep|is")
      ->check(CLI::IsMember({"laplace", "ep", "is"}));
  varsel->add_option("--n-inner", varsel_inner, "IS draws per evidence estimate");
  varsel->add_option("--top-k", varsel_topk, "models to list in the table");
  add_common(varsel, varsel_opts);

  std::string bench_config, bench_out = "bench_out", bench_timings;
  auto* bench = app.add_subcommand("bench", "run a config-driven benchmark");
  bench->add_option("--config", bench_config, "JSON config")->required();
  bench->add_option("--out", bench_out, "output directory");
  bench->add_option("--timings", bench_timings, "timings JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_opts, ingest_intercept);
    if (synth->parsed()) {
      synth_spec.link = synth_link == "logit" ? binreg::LinkKind::Logit
                                              : binreg::LinkKind::Probit;
      return cmd_synth(synth_name, synth_spec, synth_out);
    }
    if (approx->parsed()) return cmd_approx(approx_opts, approx_method);
    if (sample->parsed())
      return cmd_sample(sample_opts, sample_method, sample_n, sample_calib,
                        sample_reps);
    if (varsel->parsed())
      return cmd_varsel(varsel_opts, varsel_mode, varsel_n, varsel_evidence,
                        varsel_inner, varsel_topk);
    if (bench->parsed()) return cmd_bench(bench_config, bench_out, bench_timings);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
