#include "thetanet/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "thetanet/error.hpp"

namespace thetanet {

namespace {

struct Workspace {
  explicit Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
  std::vector<double> k1, k2, k3, k4, tmp;
};

void rk4_step_ws(const Rhs& f, double t, std::span<double> y, double h, Workspace& w) {
  const std::size_t n = y.size();
  f(t, y, w.k1);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k1[i];
  f(t + 0.5 * h, w.tmp, w.k2);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k2[i];
  f(t + 0.5 * h, w.tmp, w.k3);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * w.k3[i];
  f(t + h, w.tmp, w.k4);
  for (std::size_t i = 0; i < n; ++i)
    y[i] += h / 6.0 * (w.k1[i] + 2.0 * (w.k2[i] + w.k3[i]) + w.k4[i]);
}

void check_finite(std::span<const double> y, double t) {
  for (double v : y)
    if (!std::isfinite(v))
      throw NumericalError("integration produced a non-finite state at t = " + std::to_string(t));
}

}  // namespace

void rk4_step(const Rhs& f, double t, std::span<double> y, double h) {
  Workspace w(y.size());
  rk4_step_ws(f, t, y, h, w);
}

std::size_t integrate(const Rhs& f, std::span<double> y, double t0, double t1,
                      const IntegrateOptions& opts, const Observer& observe) {
  if (!(opts.dt > 0.0)) throw ConfigError("time step must be positive");
  if (t1 < t0) throw ConfigError("integration interval must be forward in time");
  const std::size_t n = y.size();
  Workspace w(n);
  std::size_t steps = 0;
  double t = t0;
  // Relative slack so that floating-point drift does not produce a tiny last step.
  const double eps_t = 1e-12 * std::max(1.0, std::abs(t1));

  if (!opts.adaptive) {
    while (t1 - t > eps_t) {
      const double h = std::min(opts.dt, t1 - t);
      rk4_step_ws(f, t, y, h, w);
      t = (t1 - t - h <= eps_t) ? t1 : t + h;
      ++steps;
      check_finite(y, t);
      if (observe && !observe(t, y)) break;
    }
    return steps;
  }

  std::vector<double> full(n), half(n);
  double h = std::min(opts.dt, opts.dt_max);
  while (t1 - t > eps_t) {
    h = std::min(h, t1 - t);
    std::copy(y.begin(), y.end(), full.begin());
    std::copy(y.begin(), y.end(), half.begin());
    rk4_step_ws(f, t, full, h, w);
    rk4_step_ws(f, t, half, 0.5 * h, w);
    rk4_step_ws(f, t + 0.5 * h, half, 0.5 * h, w);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = opts.tol * (1.0 + std::abs(half[i]));
      err = std::max(err, std::abs(half[i] - full[i]) / 15.0 / scale);
    }
    if (!std::isfinite(err) || err > 1.0) {
      const double shrink = std::isfinite(err) ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.1;
      h *= shrink;
      if (h < opts.dt_min) throw NumericalError("adaptive step fell below the minimum");
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
    t = (t1 - t - h <= eps_t) ? t1 : t + h;
    ++steps;
    check_finite(y, t);
    if (observe && !observe(t, y)) break;
    const double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
    h = std::clamp(h * grow, opts.dt_min, opts.dt_max);
  }
  return steps;
}

Trajectory integrate_sampled(const Rhs& f, std::vector<double> y0, double t0, double t1,
                             double every, const IntegrateOptions& opts) {
  if (!(every > 0.0)) throw ConfigError("sampling interval must be positive");
  Trajectory out;
  out.t.push_back(t0);
  out.y.push_back(y0);
  double t = t0;
  const long count = std::lround(std::ceil((t1 - t0) / every - 1e-9));
  for (long i = 1; i <= count; ++i) {
    const double next = std::min(t1, t0 + static_cast<double>(i) * every);
    integrate(f, y0, t, next, opts);
    t = next;
    out.t.push_back(t);
    out.y.push_back(y0);
  }
  return out;
}

}  // namespace thetanet
