#include "binreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "binreg/errors.hpp"

namespace binreg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim whitespace and a possible trailing \r.
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double sample_sd(const Eigen::VectorXd& col) {
  const double mean = col.mean();
  if (col.size() < 2) return 0.0;
  return std::sqrt((col.array() - mean).square().sum() / double(col.size() - 1));
}

}  // namespace

void Dataset::validate() const {
  if (n() < 1 || p() < 1) throw ValidationError("dataset: need n >= 1 and p >= 1");
  if (y.size() != n()) throw ValidationError("dataset: label/covariate row mismatch");
  if (!X.allFinite()) throw ValidationError("dataset: non-finite covariate entry");
  for (Eigen::Index i = 0; i < n(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0)
      throw ValidationError("dataset: label at row " + std::to_string(i) +
                            " is not -1 or +1");
  }
  if (column_names.size() != static_cast<std::size_t>(p()))
    throw ValidationError("dataset: column name count mismatch");
  if (intercept_column) {
    const auto j = *intercept_column;
    if (j < 0 || j >= p() || !(X.col(j).array() == 1.0).all())
      throw ValidationError("dataset: declared intercept column is not all ones");
  }
  if (standardized) {
    for (Eigen::Index j = 0; j < p(); ++j) {
      if (intercept_column && j == *intercept_column) continue;
      const double mean = X.col(j).mean();
      if (std::abs(mean) > 1e-10)
        throw ValidationError("dataset: standardized column " + column_names[j] +
                              " has nonzero mean");
      if (!is_binary_column(X.col(j))) {
        if (std::abs(sample_sd(X.col(j)) - 0.5) > 1e-10)
          throw ValidationError("dataset: standardized column " + column_names[j] +
                                " does not have sd 0.5");
      }
    }
  }
}

bool is_binary_column(const Eigen::VectorXd& col) {
  double lo = col[0], hi = col[0];
  for (Eigen::Index i = 1; i < col.size(); ++i) {
    const double v = col[i];
    if (v != lo && v != hi) {
      if (lo == hi) {
        (v < lo ? lo : hi) = v;
      } else {
        return false;
      }
    }
  }
  return lo != hi;
}

Dataset ingest_csv(const std::string& path, const std::string& label_column,
                   bool intercept) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.empty()) throw ParseError(path + ": empty header row");

  Eigen::Index label_idx = 0;
  if (!label_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end())
      throw ParseError(path + ": label column '" + label_column + "' not found");
    label_idx = it - header.begin();
  }

  std::vector<double> labels;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(path + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      try {
        std::size_t pos = 0;
        v = std::stod(cells[c], &pos);
        if (pos != cells[c].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError(path + ": row " + std::to_string(line_no) + ", column '" +
                         header[c] + "': cannot parse '" + cells[c] + "' as a number");
      }
      if (static_cast<Eigen::Index>(c) == label_idx) {
        if (v == 0.0) v = -1.0;
        if (v != -1.0 && v != 1.0)
          throw ValidationError(path + ": row " + std::to_string(line_no) +
                                ": label value " + cells[c] +
                                " outside {-1,+1} and {0,1}");
        labels.push_back(v);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  Dataset d;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p_raw = static_cast<Eigen::Index>(header.size()) - 1;
  const Eigen::Index p = p_raw + (intercept ? 1 : 0);
  d.y = Eigen::Map<Eigen::VectorXd>(labels.data(), n);
  d.X.resize(n, p);
  if (intercept) {
    d.X.col(0).setOnes();
    d.column_names.push_back("(intercept)");
    d.intercept_column = 0;
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<Eigen::Index>(c) == label_idx) continue;
    d.column_names.push_back(header[c]);
  }
  const Eigen::Index off = intercept ? 1 : 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p_raw; ++j) d.X(i, j + off) = rows[i][j];

  d.validate();
  return d;
}

Dataset standardize(const Dataset& d) {
  if (d.standardized) throw ValidationError("standardize: dataset already standardized");
  d.validate();

  Dataset out = d;
  out.standardized = true;
  out.transforms.assign(d.p(), ColumnTransform{});

  for (Eigen::Index j = 0; j < d.p(); ++j) {
    if (d.intercept_column && j == *d.intercept_column) continue;
    const Eigen::VectorXd col = d.X.col(j);
    ColumnTransform t;
    if (is_binary_column(col)) {
      const double range = col.maxCoeff() - col.minCoeff();
      t.scale = 1.0 / range;
      t.shift = col.mean();
    } else {
      const double sd = sample_sd(col);
      if (sd <= 0.0)
        throw ValidationError("standardize: column '" + d.column_names[j] +
                              "' is constant (zero variance)");
      t.scale = 0.5 / sd;
      t.shift = col.mean();
    }
    out.X.col(j) = (col.array() - t.shift) * t.scale;
    out.transforms[j] = t;
  }
  out.validate();
  return out;
}

}  // namespace binreg
