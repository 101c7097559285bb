#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "thetanet/distributions.hpp"

namespace thetanet {

// A named distribution section: `kind` plus numeric keys.
struct DistSpec {
  std::string kind;
  std::map<std::string, double> values;
  bool operator==(const DistSpec&) const = default;
};

struct GridAxis {
  std::string name;
  std::vector<double> values;
  bool operator==(const GridAxis&) const = default;
};

// Everything needed to reproduce a run. Text form:
//
//   [run]
//   recipe = fig1
//   model = theta-syn
//   seed = 1
//   [params]
//   K = -2
//   [dist in_degree]
//   kind = uniform-width
//   mean = 100
//   sigma = 5
//   [grid tau]
//   values = 0.5, 1, 2
//
// Unknown sections and keys are errors.
struct ExperimentConfig {
  std::string recipe;
  std::string model;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool paper_scale = false;
  std::string continuation;  // parameter name for `continue`
  std::map<std::string, double> params;
  std::map<std::string, DistSpec> dists;
  std::vector<GridAxis> grid;

  bool operator==(const ExperimentConfig&) const = default;

  bool has(std::string_view name) const { return params.count(std::string(name)) != 0; }
  double param(std::string_view name) const;
  double param_or(std::string_view name, double fallback) const;
  int int_param(std::string_view name) const;
  const DistSpec& dist(std::string_view name) const;
  DegreeDistribution degree(std::string_view name) const;
  HeterogeneityLaw heterogeneity() const;
  const GridAxis* axis(std::string_view name) const;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string serialize(const ExperimentConfig& cfg);
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// FNV-1a over the serialized form with the output directory blanked, so the
// hash depends only on what is computed.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

// `name=value` (params), `<dist>.<key>=value`, `grid.<axis>=a,b,c` or
// `grid.<axis>=lo:hi:n`, and the run keys model/recipe/continue.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

struct ParamSpec {
  std::string_view name;
  double lo;
  double hi;
  bool integer;
  std::string_view help;
};

const std::vector<ParamSpec>& param_specs();
const ParamSpec* find_param_spec(std::string_view name);

// Range checks on params, dist sections and grid axes. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

DistSpec degree_spec(const DegreeDistribution& d);
DistSpec heterogeneity_spec(const HeterogeneityLaw& h);

}  // namespace thetanet
