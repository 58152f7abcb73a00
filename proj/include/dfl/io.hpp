#pragma once

#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "dfl/model.hpp"

namespace dfl {

using Json = nlohmann::ordered_json;

// Density CSV: header "x,rho" (d=1), "x,y,rho" (d=2) or "x,y,z,rho" (d=3);
// one row per cell in lexicographic coordinate order; values are pointwise
// densities at the cell centers.
void write_density_csv(const std::string& path, const DiscreteDensity& rho);

// Reads a density file. With a declared grid the coordinates must match its
// cell centers; without one the grid is inferred from the (uniform) center
// spacing per axis.
DiscreteDensity read_density_csv(const std::string& path,
                                 const std::optional<Grid>& declared = std::nullopt,
                                 Boundary boundary = Boundary::open);

// FNV-1a digests for the run manifest
unsigned long long fnv1a64(const std::string& bytes);
unsigned long long digest_file(const std::string& path);

// flat "key = value" configuration with [section] headers; keys are stored
// as "section.key"
std::map<std::string, std::string> load_config(const std::string& path);

struct RunMeta {
  std::string subcommand;
  Json params = Json::object();
  Json input_digests = Json::object();
  unsigned long long seed = 0;
  double wall_time_s = 0.0;
};

// the common output envelope {command, inputs, outputs, meta}
Json result_envelope(const RunMeta& meta, const Json& inputs, const Json& outputs,
                     const Json& tolerances = Json::object());

std::string tool_version();

} // namespace dfl
