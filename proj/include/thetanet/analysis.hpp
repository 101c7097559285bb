#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thetanet/continuation.hpp"
#include "thetanet/distributions.hpp"
#include "thetanet/integrate.hpp"
#include "thetanet/meanfield.hpp"

namespace thetanet {

// Midpoint grid of the uniform law on [mean - sigma, mean + sigma]. Unlike
// DegreeDistribution::discretize, sigma = 0 keeps `count` repeated points so
// the state dimension does not change along a sigma continuation.
DegreeGrid uniform_grid(double mean, double sigma, std::size_t count);

// Synaptic mean field with its in-degree law described by scalars so that any
// of them can serve as a continuation parameter.
struct SynapticSetup {
  SynapticParams params;
  DegreeKind kind = DegreeKind::uniform_width;
  double mean = 100.0;
  double sigma = 0.0;   // uniform half-width
  double alpha = 3.0;   // shifted beta
  double lo = 50.0;
  double hi = 150.0;
  std::size_t grid_points = 100;

  DegreeGrid grid() const;
  SynapticMeanField model() const;
  // eta0, delta, K, tau, sigma, alpha. Throws ConfigError otherwise.
  void set(std::string_view name, double value);
  double get(std::string_view name) const;
};

struct GapSetup {
  GapParams params;
  double mean = 100.0;
  double sigma = 0.0;
  std::size_t grid_points = 100;

  DegreeGrid grid() const;
  GapMeanField model() const;
  // eta0, delta, g, sigma.
  void set(std::string_view name, double value);
  double get(std::string_view name) const;
};

ParamFamily synaptic_family(const SynapticSetup& base, std::string_view param);
TwoParamFamily synaptic_family(const SynapticSetup& base, std::string_view q_param,
                               std::string_view p_param);
ParamFamily gap_family(const GapSetup& base, std::string_view param);
TwoParamFamily gap_family(const GapSetup& base, std::string_view q_param,
                          std::string_view p_param);

// Integrates for t_settle from the model's default initial state, then
// Newton-polishes. Fails if the settled state is not near a fixed point.
std::vector<double> settle_fixed_point(const SynapticSetup& setup, double t_settle = 200.0);
std::vector<double> settle_fixed_point(const GapSetup& setup, double t_settle = 200.0);

// Branch of fixed points in `param` from its current value in the setup
// toward `p_end`.
Branch follow_branch(const SynapticSetup& setup, std::string_view param, double p_end,
                     ContinuationOptions opts = {});
Branch follow_branch(const GapSetup& setup, std::string_view param, double p_end,
                     ContinuationOptions opts = {});

// For each q, settles at (q, p_start), continues toward p_end and locates the
// first bifurcation of `kind`. Empty entries mean none was found in range.
std::vector<std::optional<BifurcationPoint>> scan_codim1(
    const SynapticSetup& base, std::string_view q_param, const std::vector<double>& q_values,
    std::string_view p_param, double p_start, double p_end, BifurcationKind kind,
    ContinuationOptions opts = {});
std::vector<std::optional<BifurcationPoint>> scan_codim1(
    const GapSetup& base, std::string_view q_param, const std::vector<double>& q_values,
    std::string_view p_param, double p_start, double p_end, BifurcationKind kind,
    ContinuationOptions opts = {});

// Mean period from successive upward crossings of the series through its
// window mid-range, over samples with t >= t_from. NaN with fewer than
// `min_cycles` full cycles.
double oscillation_period(std::span<const double> t, std::span<const double> x, double t_from,
                          int min_cycles = 2);

// Period of the gap mean-field oscillation (mean rate), after a transient.
double gap_period(const GapSetup& setup, double t_transient, double t_observe,
                  const IntegrateOptions& opts = {});

}  // namespace thetanet
