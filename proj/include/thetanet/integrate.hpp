#pragma once

#include <functional>
#include <span>
#include <vector>

namespace thetanet {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;
// Called after every accepted step; return false to stop early.
using Observer = std::function<bool(double t, std::span<const double> y)>;

struct IntegrateOptions {
  double dt = 0.01;       // fixed step, or initial step when adaptive
  bool adaptive = false;  // RK4 step doubling with local error control
  double tol = 1e-8;      // mixed abs/rel tolerance per component
  double dt_min = 1e-10;
  double dt_max = 0.1;
};

// Classical RK4 step of size h, in place.
void rk4_step(const Rhs& f, double t, std::span<double> y, double h);

// Integrates y from t0 to t1 in place and returns the number of accepted
// steps. The final step is shortened to land on t1. Throws NumericalError if
// the state becomes non-finite or the adaptive step falls below dt_min.
std::size_t integrate(const Rhs& f, std::span<double> y, double t0, double t1,
                      const IntegrateOptions& opts = {}, const Observer& observe = {});

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
};

// Samples the solution at t0, t0 + every, ... (and t1). Samples are exact
// grid points of the integration, not interpolated.
Trajectory integrate_sampled(const Rhs& f, std::vector<double> y0, double t0, double t1,
                             double every, const IntegrateOptions& opts = {});

}  // namespace thetanet
