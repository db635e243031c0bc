#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "binreg/dataset.hpp"
#include "binreg/gaussian.hpp"
#include "binreg/importance.hpp"
#include "binreg/laplace.hpp"
#include "binreg/mcmc.hpp"
#include "binreg/metrics.hpp"
#include "binreg/smc.hpp"

namespace binreg {

/// Shortest-round-trip decimal form; identical runs print identical bytes.
std::string format_double(double v);

nlohmann::json gaussian_to_json(const GaussianApprox& g);
GaussianApprox gaussian_from_json(const nlohmann::json& j);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

/// Dataset as CSV (label column first) plus the standardization
/// transforms as a JSON sidecar for coefficient back-mapping.
void write_dataset_csv(const std::string& path, const Dataset& d);
void write_transforms_json(const std::string& path, const Dataset& d);

/// Columnar CSV of draws (one column per coefficient plus log_weight) and
/// a JSON metadata sidecar. Timings never enter these files; see the
/// --timings flag on the CLI.
void write_weighted_sample(const std::string& prefix, const WeightedSample& ws,
                           const nlohmann::json& metadata);
void write_chain(const std::string& prefix, const ChainTrace& trace,
                 const nlohmann::json& metadata);
void write_particles(const std::string& prefix, const ParticleSystem& ps,
                     const nlohmann::json& metadata);
void write_marginal_curve(const std::string& path, const MarginalCurve& curve);

}  // namespace binreg
