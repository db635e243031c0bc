#include "binreg/synth.hpp"

#include <cmath>

#include "binreg/dataset.hpp"
#include "binreg/errors.hpp"
#include "binreg/rng.hpp"

namespace binreg {

Dataset synth_dataset(const SynthSpec& spec) {
  RngStream rng(spec.seed);
  const Eigen::Index n = spec.rows, k = spec.covariates;

  // AR(1)-correlated Gaussian base.
  Eigen::MatrixXd z(n, k);
  const double rho = spec.correlation;
  const double resid = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index i = 0; i < n; ++i) {
    RngStream row = rng.substream(0x10, i);
    double prev = row.normal();
    z(i, 0) = prev;
    for (Eigen::Index j = 1; j < k; ++j) {
      prev = rho * prev + resid * row.normal();
      z(i, j) = prev;
    }
  }

  // Raw covariates: cycle through shapes so the standardizer has work to
  // do (counts, skewed positives, plain Gaussians, binaries at the end).
  Eigen::MatrixXd x_raw(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const bool binary = j >= k - spec.binary_columns;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = z(i, j);
      if (binary) {
        x_raw(i, j) = v > 0.0 ? 1.0 : 0.0;
      } else if (j % 3 == 1) {
        x_raw(i, j) = std::round(20.0 + 8.0 * v);  // count-like
      } else if (j % 3 == 2) {
        x_raw(i, j) = std::exp(0.5 * v);  // skewed positive
      } else {
        x_raw(i, j) = 10.0 * v + 50.0;
      }
    }
  }

  Dataset raw;
  raw.X.resize(n, k + (spec.intercept ? 1 : 0));
  Eigen::Index off = 0;
  if (spec.intercept) {
    raw.X.col(0).setOnes();
    raw.column_names.push_back("(intercept)");
    raw.intercept_column = 0;
    off = 1;
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    raw.X.col(j + off) = x_raw.col(j);
    raw.column_names.push_back("x" + std::to_string(j + 1));
  }
  raw.y = Eigen::VectorXd::Ones(n);  // placeholder until labels are drawn

  const Dataset std_view = standardize(raw);

  // True coefficients live on the standardized scale.
  RngStream beta_rng = rng.substream(0x20);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(std_view.p());
  if (spec.intercept) beta[0] = 0.3 * beta_rng.normal();
  std::vector<Eigen::Index> cov_idx;
  for (Eigen::Index j = 0; j < std_view.p(); ++j)
    if (!(spec.intercept && j == 0)) cov_idx.push_back(j);
  if (spec.sparse_nonzero < 0) {
    for (Eigen::Index j : cov_idx) beta[j] = spec.signal_scale * beta_rng.normal();
  } else {
    // Deterministic spread of the nonzero positions.
    const int nz = std::min<int>(spec.sparse_nonzero, cov_idx.size());
    for (int s = 0; s < nz; ++s) {
      const Eigen::Index j = cov_idx[(s * cov_idx.size()) / std::max(1, nz)];
      beta[j] = spec.signal_scale * (beta_rng.bernoulli(0.5) ? 1.0 : -1.0) *
                (0.75 + 0.5 * beta_rng.uniform());
    }
  }

  const LinkModel link{spec.link};
  RngStream label_rng = rng.substream(0x30);
  Dataset out = raw;
  const Eigen::VectorXd eta = std_view.X * beta;
  for (Eigen::Index i = 0; i < n; ++i)
    out.y[i] = label_rng.uniform() < link.cdf(eta[i]) ? 1.0 : -1.0;
  return out;
}

Dataset pima_replica() {
  SynthSpec spec;
  spec.rows = 532;
  spec.covariates = 7;
  spec.seed = 19;
  spec.correlation = 0.35;
  spec.signal_scale = 0.9;
  spec.link = LinkKind::Probit;
  Dataset d = synth_dataset(spec);
  const char* names[] = {"npreg", "glu", "bp", "skin", "bmi", "ped", "age"};
  for (int j = 0; j < 7; ++j) d.column_names[j + 1] = names[j];
  return d;
}

Dataset german_replica() {
  SynthSpec spec;
  spec.rows = 999;
  spec.covariates = 24;
  spec.seed = 23;
  spec.correlation = 0.25;
  spec.signal_scale = 0.6;
  spec.binary_columns = 8;
  spec.link = LinkKind::Logit;
  return synth_dataset(spec);
}

Dataset musk_replica() {
  SynthSpec spec;
  spec.rows = 476;
  spec.covariates = 94;
  spec.seed = 29;
  spec.correlation = 0.85;
  spec.signal_scale = 1.4;
  spec.sparse_nonzero = 8;
  spec.link = LinkKind::Probit;
  return synth_dataset(spec);
}

bool is_builtin_dataset(const std::string& name) {
  return name == "pima_replica" || name == "german_replica" || name == "musk_replica";
}

Dataset builtin_dataset(const std::string& name) {
  if (name == "pima_replica") return pima_replica();
  if (name == "german_replica") return german_replica();
  if (name == "musk_replica") return musk_replica();
  throw ValidationError("unknown builtin dataset '" + name + "'");
}

}  // namespace binreg
