#include "binreg/bench.hpp"

#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "binreg/artifacts.hpp"
#include "binreg/ep.hpp"
#include "binreg/errors.hpp"
#include "binreg/gibbs.hpp"
#include "binreg/importance.hpp"
#include "binreg/laplace.hpp"
#include "binreg/smc.hpp"
#include "binreg/special.hpp"
#include "binreg/synth.hpp"

namespace binreg {

using nlohmann::json;

std::string BenchScenario::name() const {
  std::string s = prior == PriorKind::Gaussian ? "gaussian" : "cauchy";
  s += "/";
  s += link == LinkKind::Probit ? "probit" : "logit";
  return s;
}

BenchConfig BenchConfig::from_json_file(const std::string& path) {
  const json j = load_json(path);
  BenchConfig c;
  for (const auto& d : j.at("datasets")) c.datasets.push_back(d.get<std::string>());
  if (j.contains("label_column")) c.label_column = j["label_column"].get<std::string>();
  for (const auto& s : j.at("scenarios")) {
    const std::string name = s.get<std::string>();
    const auto slash = name.find('/');
    if (slash == std::string::npos)
      throw ValidationError("bench config: scenario must look like prior/link");
    const std::string prior = name.substr(0, slash), link = name.substr(slash + 1);
    BenchScenario sc;
    if (prior == "gaussian") sc.prior = PriorKind::Gaussian;
    else if (prior == "cauchy") sc.prior = PriorKind::Cauchy;
    else throw ValidationError("bench config: unknown prior '" + prior + "'");
    if (link == "probit") sc.link = LinkKind::Probit;
    else if (link == "logit") sc.link = LinkKind::Logit;
    else throw ValidationError("bench config: unknown link '" + link + "'");
    c.scenarios.push_back(sc);
  }
  for (const auto& m : j.at("methods")) c.methods.push_back(m.get<std::string>());
  if (j.contains("sample_size")) c.sample_size = j["sample_size"].get<Eigen::Index>();
  if (j.contains("chain_length")) c.chain_length = j["chain_length"].get<Eigen::Index>();
  if (j.contains("repetitions")) c.repetitions = j["repetitions"].get<int>();
  if (j.contains("golden_iterations"))
    c.golden_iterations = j["golden_iterations"].get<Eigen::Index>();
  if (j.contains("calibration")) c.calibration = j["calibration"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  c.validate();
  return c;
}

void BenchConfig::validate() const {
  if (datasets.empty()) throw ValidationError("bench config: no datasets");
  if (scenarios.empty()) throw ValidationError("bench config: no scenarios");
  if (methods.empty()) throw ValidationError("bench config: no methods");
  if (repetitions < 1) throw ValidationError("bench config: repetitions < 1");
  if (calibration != "ep" && calibration != "laplace")
    throw ValidationError("bench config: calibration must be ep or laplace");
  static const std::vector<std::string> known = {
      "laplace", "improved-laplace", "laplace-em", "ep", "is",
      "rqmc",    "rwmh",             "gibbs",      "hmc", "smc"};
  for (const auto& m : methods)
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw ValidationError("bench config: unknown method '" + m + "'");
}

namespace {

GridDensity normal_density_on(const Eigen::VectorXd& grid, double mu, double sd) {
  GridDensity d;
  d.grid = grid;
  d.density.resize(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double z = (grid[k] - mu) / sd;
    d.density[k] = std::exp(-0.5 * z * z) / (sd * kSqrtTwoPi);
  }
  return d;
}

std::vector<double> gaussian_ma(const GaussianApprox& g, const GoldenReference& golden) {
  std::vector<double> ma;
  for (Eigen::Index j = 0; j < g.dim(); ++j) {
    const GridDensity q =
        normal_density_on(golden.marginals[j].grid, g.mean()[j],
                          std::sqrt(g.cov()(j, j)));
    ma.push_back(marginal_accuracy(q.normalized(), golden.marginals[j]));
  }
  return ma;
}

std::vector<double> weighted_sample_ma(const WeightedSample& ws,
                                       const GoldenReference& golden) {
  std::vector<double> ma;
  const Eigen::VectorXd w = ws.normalized_weights();
  for (Eigen::Index j = 0; j < ws.points.cols(); ++j) {
    const GridDensity q =
        kde_density(ws.points.col(j), w, golden.marginals[j].grid).normalized();
    ma.push_back(marginal_accuracy(q, golden.marginals[j]));
  }
  return ma;
}

std::vector<double> chain_ma(const ChainTrace& trace, const GoldenReference& golden) {
  std::vector<double> ma;
  const auto kept = trace.kept();
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(kept.rows());
  for (Eigen::Index j = 0; j < kept.cols(); ++j) {
    const GridDensity q =
        kde_density(kept.col(j), w, golden.marginals[j].grid).normalized();
    ma.push_back(marginal_accuracy(q, golden.marginals[j]));
  }
  return ma;
}

void finish_mse(BenchCell& cell, const Eigen::MatrixXd& means,
                const Eigen::MatrixXd& vars, const GoldenReference& golden) {
  const Eigen::Index p = means.cols();
  cell.mse_mean.resize(p);
  cell.mse_var.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    cell.mse_mean[j] = (means.col(j).array() - golden.mean[j]).square().mean();
    cell.mse_var[j] = (vars.col(j).array() - golden.variance[j]).square().mean();
  }
}

struct CpuTimer {
  std::clock_t c0 = std::clock();
  std::chrono::steady_clock::time_point w0 = std::chrono::steady_clock::now();
  void stop(BenchCell& cell, int reps) {
    cell.cpu_seconds = static_cast<double>(std::clock() - c0) / CLOCKS_PER_SEC / reps;
    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - w0).count() /
        reps;
  }
};

BenchCell run_cell(const std::string& method, const PosteriorTarget& target,
                   const GaussianApprox& calib, const GoldenReference& golden,
                   const BenchConfig& cfg) {
  BenchCell cell;
  cell.method = method;
  const Eigen::Index p = target.dim();

  if (method == "laplace" || method == "ep" || method == "laplace-em") {
    CpuTimer timer;
    GaussianApprox g;
    if (method == "laplace") {
      g = laplace(target);
    } else if (method == "ep") {
      g = ep_fit(target).approx;
    } else {
      g = laplace_em(target).approx;
    }
    timer.stop(cell, 1);
    cell.ma = gaussian_ma(g, golden);
    cell.log_evidence = g.log_evidence ? std::optional<double>(*g.log_evidence)
                                       : std::nullopt;
    Eigen::MatrixXd means(1, p), vars(1, p);
    means.row(0) = g.mean().transpose();
    vars.row(0) = g.cov().diagonal().transpose();
    finish_mse(cell, means, vars, golden);
  } else if (method == "improved-laplace") {
    CpuTimer timer;
    std::vector<MarginalCurve> curves;
    for (Eigen::Index j = 0; j < p; ++j)
      curves.push_back(improved_laplace_marginal(target, j));
    timer.stop(cell, 1);
    Eigen::MatrixXd means(1, p), vars(1, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const GridDensity q{curves[j].grid, curves[j].density};
      cell.ma.push_back(marginal_accuracy(q, golden.marginals[j]));
      // Curve moments by the trapezoid rule.
      double m1 = 0.0, m2 = 0.0;
      for (Eigen::Index k = 0; k + 1 < q.grid.size(); ++k) {
        const double dx = q.grid[k + 1] - q.grid[k];
        m1 += 0.5 * dx * (q.grid[k] * q.density[k] + q.grid[k + 1] * q.density[k + 1]);
        m2 += 0.5 * dx *
              (q.grid[k] * q.grid[k] * q.density[k] +
               q.grid[k + 1] * q.grid[k + 1] * q.density[k + 1]);
      }
      means(0, j) = m1;
      vars(0, j) = m2 - m1 * m1;
    }
    finish_mse(cell, means, vars, golden);
  } else if (method == "is" || method == "smc") {
    Eigen::MatrixXd means(cfg.repetitions, p), vars(cfg.repetitions, p);
    double ef_sum = 0.0;
    double log_ev = 0.0;
    CpuTimer timer;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      WeightedSample ws;
      if (method == "is") {
        ws = importance_sample(calib, target, cfg.sample_size, cfg.seed + rep);
        ef_sum += ws.ef;
      } else {
        const ParticleSystem ps =
            temper_smc(calib, target, cfg.sample_size, cfg.seed + rep);
        ws.points = ps.particles;
        ws.log_weights = ps.log_weights;
        ws.log_evidence_estimate = ps.log_evidence_estimate;
        ws.ef = ps.stages.back().ef;
        ef_sum += ws.ef;
      }
      means.row(rep) = weighted_mean(ws).transpose();
      vars.row(rep) = weighted_variance(ws).transpose();
      if (rep == 0) {
        cell.ma = weighted_sample_ma(ws, golden);
        log_ev = ws.log_evidence_estimate;
      }
    }
    timer.stop(cell, cfg.repetitions);
    cell.ef = ef_sum / cfg.repetitions;
    cell.log_evidence = log_ev;
    finish_mse(cell, means, vars, golden);
  } else if (method == "rqmc") {
    CpuTimer timer;
    const RqmcResult rq = rqmc_importance_sample(calib, target, cfg.sample_size,
                                                 cfg.repetitions, cfg.seed);
    timer.stop(cell, cfg.repetitions);
    Eigen::MatrixXd means = rq.mean_estimates;
    Eigen::MatrixXd vars(cfg.repetitions, p);
    double ef_sum = 0.0;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      vars.row(rep) = weighted_variance(rq.replications[rep]).transpose();
      ef_sum += rq.replications[rep].ef;
    }
    cell.ef = ef_sum / cfg.repetitions;
    cell.log_evidence = rq.replications[0].log_evidence_estimate;
    cell.ma = weighted_sample_ma(rq.replications[0], golden);
    finish_mse(cell, means, vars, golden);
  } else if (method == "rwmh" || method == "hmc" || method == "gibbs") {
    Eigen::MatrixXd means(cfg.repetitions, p), vars(cfg.repetitions, p);
    double acc_sum = 0.0;
    CpuTimer timer;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      ChainTrace trace;
      if (method == "rwmh") {
        trace = rwmh(target, calib, cfg.chain_length, cfg.seed + rep);
      } else if (method == "hmc") {
        trace = hmc(target, calib, cfg.chain_length, cfg.seed + rep);
      } else {
        trace = gibbs_probit(target, cfg.chain_length, cfg.seed + rep);
      }
      acc_sum += trace.acceptance_rate;
      means.row(rep) = trace.mean().transpose();
      vars.row(rep) = trace.variance().transpose();
      if (rep == 0) cell.ma = chain_ma(trace, golden);
    }
    timer.stop(cell, cfg.repetitions);
    cell.acceptance = acc_sum / cfg.repetitions;
    finish_mse(cell, means, vars, golden);
  } else {
    throw ValidationError("unknown method '" + method + "'");
  }

  cell.median_ma = median(cell.ma);
  return cell;
}

}  // namespace

BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;

  for (const auto& ds_name : cfg.datasets) {
    Dataset raw = is_builtin_dataset(ds_name)
                      ? builtin_dataset(ds_name)
                      : ingest_csv(ds_name, cfg.label_column, true);
    const Dataset data = standardize(raw);

    for (const auto& scenario : cfg.scenarios) {
      const PosteriorTarget target(data,
                                   Prior::weakly_informative(scenario.prior, data),
                                   LinkModel{scenario.link});
      GoldenReference golden;
      GaussianApprox calib;
      std::string setup_error;
      try {
        GoldenOptions gopts;
        gopts.iterations = cfg.golden_iterations;
        golden = build_golden(target, cfg.seed + 0x601d, gopts);
        calib = cfg.calibration == "ep" ? ep_fit(target).approx : laplace(target);
      } catch (const std::exception& e) {
        setup_error = e.what();
      }

      for (const auto& method : cfg.methods) {
        BenchCell cell;
        cell.dataset = ds_name;
        cell.scenario = scenario.name();
        cell.method = method;
        if (!setup_error.empty()) {
          cell.failed = true;
          cell.error = "setup: " + setup_error;
          report.cells.push_back(cell);
          continue;
        }
        try {
          cell = run_cell(method, target, calib, golden, cfg);
          cell.dataset = ds_name;
          cell.scenario = scenario.name();
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
        }
        report.cells.push_back(cell);
      }

      // Post-pass within this (dataset, scenario): IRIS vs the IS cell and
      // the RQMC efficiency gain.
      BenchCell* is_cell = nullptr;
      for (auto& c : report.cells)
        if (c.dataset == ds_name && c.scenario == scenario.name() &&
            c.method == "is" && !c.failed)
          is_cell = &c;
      if (is_cell) {
        for (auto& c : report.cells) {
          if (c.dataset != ds_name || c.scenario != scenario.name() || c.failed)
            continue;
          if (&c != is_cell && !c.mse_mean.empty() && c.cpu_seconds > 0.0) {
            std::vector<double> im, iv;
            for (std::size_t j = 0; j < c.mse_mean.size(); ++j) {
              if (c.mse_mean[j] > 0.0 && is_cell->mse_mean[j] > 0.0)
                im.push_back(iris(c.mse_mean[j], c.cpu_seconds,
                                  is_cell->mse_mean[j], is_cell->cpu_seconds));
              if (c.mse_var[j] > 0.0 && is_cell->mse_var[j] > 0.0)
                iv.push_back(iris(c.mse_var[j], c.cpu_seconds, is_cell->mse_var[j],
                                  is_cell->cpu_seconds));
            }
            if (!im.empty()) c.median_iris_mean = median(im);
            if (!iv.empty()) c.median_iris_var = median(iv);
          }
          if (c.method == "rqmc" && !c.mse_mean.empty()) {
            std::vector<double> gains;
            for (std::size_t j = 0; j < c.mse_mean.size(); ++j)
              if (c.mse_mean[j] > 0.0)
                gains.push_back(is_cell->mse_mean[j] / c.mse_mean[j]);
            if (!gains.empty()) c.qmc_gain_mean = median(gains);
          }
        }
      }
    }
  }
  return report;
}

namespace {
json cell_to_json(const BenchCell& c, bool with_timing) {
  json j;
  j["dataset"] = c.dataset;
  j["scenario"] = c.scenario;
  j["method"] = c.method;
  j["failed"] = c.failed;
  if (c.failed) {
    j["error"] = c.error;
    return j;
  }
  j["ma"] = c.ma;
  j["median_ma"] = c.median_ma;
  if (c.ef) j["ef"] = *c.ef;
  if (c.acceptance) j["acceptance"] = *c.acceptance;
  if (c.log_evidence) j["log_evidence"] = *c.log_evidence;
  j["mse_mean"] = c.mse_mean;
  j["mse_var"] = c.mse_var;
  if (c.qmc_gain_mean) j["qmc_gain_mean"] = *c.qmc_gain_mean;
  if (with_timing) {
    j["cpu_seconds"] = c.cpu_seconds;
    j["wall_seconds"] = c.wall_seconds;
    if (c.median_iris_mean) j["median_iris_mean"] = *c.median_iris_mean;
    if (c.median_iris_var) j["median_iris_var"] = *c.median_iris_var;
  }
  return j;
}
}  // namespace

void write_report(const std::string& out_dir, const BenchConfig& cfg,
                  const BenchReport& report) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const std::string& name) { return out_dir + "/" + name; };

  json deterministic = json::array();
  json timing = json::array();
  for (const auto& c : report.cells) {
    deterministic.push_back(cell_to_json(c, false));
    timing.push_back(cell_to_json(c, true));
  }
  json main;
  main["seed"] = cfg.seed;
  main["repetitions"] = cfg.repetitions;
  main["sample_size"] = cfg.sample_size;
  main["chain_length"] = cfg.chain_length;
  main["cells"] = deterministic;
  save_json(path("report.json"), main);
  // Measured times (and the IRIS values computed from them) are the one
  // run-dependent output; they live only here.
  save_json(path("timing.json"), timing);

  std::ofstream cells(path("cells.csv"));
  cells << "dataset,scenario,method,failed,median_ma,ef,acceptance,log_evidence,"
           "qmc_gain_mean\n";
  for (const auto& c : report.cells) {
    cells << c.dataset << "," << c.scenario << "," << c.method << ","
          << (c.failed ? 1 : 0) << ",";
    if (!c.failed) cells << format_double(c.median_ma);
    cells << ",";
    if (c.ef) cells << format_double(*c.ef);
    cells << ",";
    if (c.acceptance) cells << format_double(*c.acceptance);
    cells << ",";
    if (c.log_evidence) cells << format_double(*c.log_evidence);
    cells << ",";
    if (c.qmc_gain_mean) cells << format_double(*c.qmc_gain_mean);
    cells << "\n";
  }

  std::ofstream ma(path("ma_by_component.csv"));
  ma << "dataset,scenario,method,component,ma\n";
  for (const auto& c : report.cells) {
    if (c.failed) continue;
    for (std::size_t j = 0; j < c.ma.size(); ++j)
      ma << c.dataset << "," << c.scenario << "," << c.method << "," << j << ","
         << format_double(c.ma[j]) << "\n";
  }

  std::ofstream mse(path("mse_by_component.csv"));
  mse << "dataset,scenario,method,component,mse_mean,mse_var\n";
  for (const auto& c : report.cells) {
    if (c.failed) continue;
    for (std::size_t j = 0; j < c.mse_mean.size(); ++j)
      mse << c.dataset << "," << c.scenario << "," << c.method << "," << j << ","
          << format_double(c.mse_mean[j]) << "," << format_double(c.mse_var[j])
          << "\n";
  }
}

}  // namespace binreg
