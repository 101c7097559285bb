#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "thetanet/analysis.hpp"
#include "thetanet/config.hpp"
#include "thetanet/netsim.hpp"
#include "thetanet/network.hpp"
#include "thetanet/output.hpp"

namespace thetanet {

bool is_network_model(std::string_view model);
bool is_meanfield_model(std::string_view model);

// Published parameter values for a model, with desk-scale run lengths.
ExperimentConfig default_config(std::string_view model);

// Seed streams derived from the config seed.
enum class Stream : std::uint64_t { network = 0, heterogeneity = 1 };

std::shared_ptr<const Network> build_network(const ExperimentConfig& cfg, std::uint64_t seed);
// Per-neuron deviations drawn from the heterogeneity law.
std::vector<double> draw_heterogeneity(const ExperimentConfig& cfg, int n, std::uint64_t seed);
std::unique_ptr<Simulator> build_simulator(const ExperimentConfig& cfg);
std::unique_ptr<Simulator> build_simulator(const ExperimentConfig& cfg,
                                           std::shared_ptr<const Network> net,
                                           std::vector<double> deviations);

// The mean-field models need a Lorentzian heterogeneity; its centre is added
// to eta0 and its scale becomes delta.
SynapticSetup synaptic_setup(const ExperimentConfig& cfg);
GapSetup gap_setup(const ExperimentConfig& cfg);

struct Series {
  std::vector<double> t;
  std::vector<double> primary;
  std::vector<double> secondary;
  std::string primary_name;
  std::string secondary_name;
  std::uint64_t spikes = 0;
};

// Runs the configured model (network or mean field) for t_end.
Series run_model(const ExperimentConfig& cfg);

struct PointResult {
  std::vector<double> coords;
  WindowStats stats;
  std::uint64_t spikes = 0;
  std::string error;  // empty on success
};

// Trailing-window statistics of a single run.
PointResult run_point(const ExperimentConfig& cfg);

// Cartesian product of the config's grid axes. Axis names are parameters or
// `<dist>.<key>`. Points run in parallel; a failing point records its error
// and the sweep continues.
std::vector<PointResult> grid_sweep(const ExperimentConfig& cfg, int threads);
CsvTable sweep_table(const ExperimentConfig& cfg, const std::vector<PointResult>& results);

// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception
// is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace thetanet
