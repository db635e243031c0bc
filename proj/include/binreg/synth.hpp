#pragma once

#include "binreg/model.hpp"

namespace binreg {

/// Deterministic synthetic binary-regression dataset: correlated raw
/// covariates (AR(1) mixing, a few skewed/count-like and binary columns),
/// labels drawn from the link applied to a linear signal on the
/// standardized scale. Returned unstandardized.
struct SynthSpec {
  Eigen::Index rows = 100;
  Eigen::Index covariates = 2;  // excluding the intercept
  std::uint64_t seed = 1;
  double correlation = 0.3;
  double signal_scale = 1.0;   // sd of the nonzero true coefficients
  int sparse_nonzero = -1;     // -1: all coefficients nonzero
  int binary_columns = 0;
  bool intercept = true;
  LinkKind link = LinkKind::Probit;
};

Dataset synth_dataset(const SynthSpec& spec);

/// Replicas of the shapes of classic benchmark datasets, for use where the
/// originals cannot be redistributed: same n, p and rough signal level.
Dataset pima_replica();    // n = 532, p = 8 with intercept
Dataset german_replica();  // n = 999, p = 25 with intercept
Dataset musk_replica();    // n = 476, p = 95 with intercept, high correlation

/// Look up a named builtin ("pima_replica", ...); empty name -> false.
bool is_builtin_dataset(const std::string& name);
Dataset builtin_dataset(const std::string& name);

}  // namespace binreg
