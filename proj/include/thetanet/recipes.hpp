#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thetanet/config.hpp"
#include "thetanet/output.hpp"

namespace thetanet {

struct RecipeContext {
  OutputDir& out;
  int threads = 1;
  std::ostream* log = nullptr;

  void note(const std::string& line) const;
  // Stamps recipe, config hash and seed into a table's metadata.
  void tag(CsvTable& table, const ExperimentConfig& cfg) const;
};

struct Recipe {
  std::string name;
  std::string summary;
  // Desk-scale defaults, or the full published run lengths and sizes.
  std::function<ExperimentConfig(bool paper_scale)> defaults;
  std::function<void(const ExperimentConfig&, RecipeContext&)> run;
};

const std::vector<Recipe>& recipes();
// Throws ConfigError for unknown names.
const Recipe& find_recipe(std::string_view name);

struct RunRequest {
  std::string recipe;
  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool paper_scale = false;
  int threads = 1;
};

// Defaults (or the config file), then overrides, then --seed / --out.
ExperimentConfig resolve_config(const RunRequest& req);

struct RunReport {
  ExperimentConfig config;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
};

// Runs the recipe and writes config.cfg and manifest.json next to its
// artifacts.
RunReport run_recipe(const RunRequest& req, std::ostream* log = nullptr);

std::string manifest_json(const ExperimentConfig& cfg, std::string_view command,
                          const std::vector<std::string>& files, double wall_seconds,
                          int threads);
// Writes config.cfg and manifest.json.
void write_manifest(OutputDir& out, const ExperimentConfig& cfg, std::string_view command,
                    double wall_seconds, int threads);

}  // namespace thetanet
