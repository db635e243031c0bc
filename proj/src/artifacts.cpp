#include "binreg/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "binreg/errors.hpp"

namespace binreg {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {
json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i)));
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) return {};
  const Eigen::Index p = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  return out;
}
}  // namespace

json gaussian_to_json(const GaussianApprox& g) {
  json j;
  j["mean"] = vec_to_json(g.mean());
  j["covariance"] = mat_to_json(g.cov());
  if (g.log_evidence) j["log_evidence"] = *g.log_evidence;
  return j;
}

GaussianApprox gaussian_from_json(const json& j) {
  GaussianApprox g = GaussianApprox::from_moments(vec_from_json(j.at("mean")),
                                                  mat_from_json(j.at("covariance")));
  if (j.contains("log_evidence")) g.log_evidence = j["log_evidence"].get<double>();
  return g;
}

void save_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
  auto out = open_out(path);
  out << "label";
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    if (d.intercept_column && j == *d.intercept_column)
      continue;  // the intercept is re-added at ingestion
    out << "," << d.column_names[j];
  }
  out << "\n";
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    out << (d.y[i] > 0 ? "1" : "-1");
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      if (d.intercept_column && j == *d.intercept_column) continue;
      out << "," << format_double(d.X(i, j));
    }
    out << "\n";
  }
}

void write_transforms_json(const std::string& path, const Dataset& d) {
  json cols = json::array();
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    json c;
    c["name"] = d.column_names[j];
    c["shift"] = d.standardized && !d.transforms.empty() ? d.transforms[j].shift : 0.0;
    c["scale"] = d.standardized && !d.transforms.empty() ? d.transforms[j].scale : 1.0;
    c["intercept"] = d.intercept_column && j == *d.intercept_column;
    cols.push_back(c);
  }
  json j;
  j["standardized"] = d.standardized;
  j["columns"] = cols;
  save_json(path, j);
}

namespace {
void write_points_csv(const std::string& path, const Eigen::MatrixXd& pts,
                      const Eigen::VectorXd* extra, const std::string& extra_name) {
  auto out = open_out(path);
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    out << (j ? "," : "") << "beta" << j;
  if (extra) out << "," << extra_name;
  out << "\n";
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < pts.cols(); ++j)
      out << (j ? "," : "") << format_double(pts(i, j));
    if (extra) out << "," << format_double((*extra)[i]);
    out << "\n";
  }
}
}  // namespace

void write_weighted_sample(const std::string& prefix, const WeightedSample& ws,
                           const json& metadata) {
  write_points_csv(prefix + ".csv", ws.points, &ws.log_weights, "log_weight");
  json meta = metadata;
  meta["log_evidence_estimate"] = ws.log_evidence_estimate;
  meta["efficiency_factor"] = ws.ef;
  meta["n"] = ws.size();
  save_json(prefix + ".meta.json", meta);
}

void write_chain(const std::string& prefix, const ChainTrace& trace,
                 const json& metadata) {
  write_points_csv(prefix + ".csv", trace.states, &trace.log_post, "log_posterior");
  json meta = metadata;
  meta["acceptance_rate"] = trace.acceptance_rate;
  meta["burn_in"] = trace.burn_in;
  meta["iterations"] = trace.length();
  json tuning;
  for (const auto& [key, value] : trace.tuning) tuning[key] = value;
  meta["tuning"] = tuning;
  save_json(prefix + ".meta.json", meta);
}

void write_particles(const std::string& prefix, const ParticleSystem& ps,
                     const json& metadata) {
  write_points_csv(prefix + ".csv", ps.particles, &ps.log_weights, "log_weight");
  json meta = metadata;
  meta["log_evidence_estimate"] = ps.log_evidence_estimate;
  meta["ladder"] = ps.ladder;
  save_json(prefix + ".meta.json", meta);
  // Stage-by-stage diagnostics as JSON lines.
  auto out = open_out(prefix + ".stages.jsonl");
  for (const auto& s : ps.stages) {
    json line;
    line["stage"] = s.stage;
    line["delta"] = s.delta;
    line["ef"] = s.ef;
    line["move_acceptance"] = s.move_acceptance;
    line["log_evidence_increment"] = s.log_evidence_increment;
    out << line.dump() << "\n";
  }
}

void write_marginal_curve(const std::string& path, const MarginalCurve& curve) {
  auto out = open_out(path);
  out << "beta" << curve.component << ",density\n";
  for (Eigen::Index k = 0; k < curve.grid.size(); ++k)
    out << format_double(curve.grid[k]) << "," << format_double(curve.density[k])
        << "\n";
}

}  // namespace binreg
