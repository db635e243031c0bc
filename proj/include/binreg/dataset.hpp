#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace binreg {

/// Affine map applied to one raw column: x_std = (x_raw - shift) * scale.
/// Kept so fitted coefficients can be mapped back to the raw scale.
struct ColumnTransform {
  double shift = 0.0;
  double scale = 1.0;
};

/// Binary-response design: labels in {-1,+1} and an n x p covariate matrix.
/// Column 0 is the intercept when one was requested at ingestion.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;
  std::optional<Eigen::Index> intercept_column;
  bool standardized = false;
  std::vector<ColumnTransform> transforms;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  /// Throws ValidationError if labels, shapes, or (when standardized)
  /// the column-moment invariants do not hold.
  void validate() const;
};

/// A column is binary iff it takes exactly two distinct values.
bool is_binary_column(const Eigen::VectorXd& col);

/// Reads a CSV with a header row. The label column (by name; first column
/// when empty) must contain {-1,+1} or {0,1}; 0 maps to -1. When
/// `intercept` is set, a column of ones named "(intercept)" is prepended.
Dataset ingest_csv(const std::string& path, const std::string& label_column = "",
                   bool intercept = true);

/// Centers/rescales columns: non-binary to mean 0 / sd 0.5, binary to
/// mean 0 / range 1; a declared intercept column is left untouched.
/// Records the per-column transforms on the result.
Dataset standardize(const Dataset& d);

}  // namespace binreg
