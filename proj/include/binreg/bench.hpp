#pragma once

#include <optional>
#include <string>
#include <vector>

#include "binreg/golden.hpp"
#include "binreg/model.hpp"

namespace binreg {

struct BenchScenario {
  PriorKind prior = PriorKind::Gaussian;
  LinkKind link = LinkKind::Probit;
  std::string name() const;
};

struct BenchConfig {
  std::vector<std::string> datasets;  // builtin names or CSV paths
  std::string label_column;           // for CSV datasets
  std::vector<BenchScenario> scenarios;
  std::vector<std::string> methods;
  Eigen::Index sample_size = 16384;   // IS/RQMC/SMC draws (power of two)
  Eigen::Index chain_length = 100000; // MCMC iterations
  int repetitions = 25;
  Eigen::Index golden_iterations = 300000;
  std::string calibration = "ep";     // proposal source: "ep" or "laplace"
  std::uint64_t seed = 1;
  int threads = 1;

  static BenchConfig from_json_file(const std::string& path);
  void validate() const;
};

/// One (dataset, scenario, method) result. Timing fields live apart from
/// the deterministic metrics and are serialized to the timing sidecar only.
struct BenchCell {
  std::string dataset, scenario, method;
  bool failed = false;
  std::string error;

  std::vector<double> ma;  // per-component marginal accuracy vs golden
  double median_ma = 0.0;
  std::optional<double> ef;
  std::optional<double> acceptance;
  std::optional<double> log_evidence;
  std::vector<double> mse_mean;  // across repetitions, vs golden means
  std::vector<double> mse_var;
  std::optional<double> qmc_gain_mean;  // median MSE(is)/MSE(rqmc)

  double cpu_seconds = 0.0;  // single-threaded process CPU per repetition
  double wall_seconds = 0.0;
  std::optional<double> median_iris_mean;
  std::optional<double> median_iris_var;
};

struct BenchReport {
  std::vector<BenchCell> cells;
};

BenchReport run_benchmark(const BenchConfig& config);

/// report.json + cells.csv + ma_by_component.csv (all deterministic given
/// the config seed) and timing.json (measured CPU/wall + IRIS).
void write_report(const std::string& out_dir, const BenchConfig& config,
                  const BenchReport& report);

}  // namespace binreg
