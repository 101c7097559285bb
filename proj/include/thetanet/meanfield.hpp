#pragma once

#include <complex>
#include <span>
#include <vector>

#include "thetanet/distributions.hpp"
#include "thetanet/kernels.hpp"

namespace thetanet {

using Complex = std::complex<double>;

// |1 + b| below this is treated as the singular (fully synchronized at
// threshold) state.
inline constexpr double kSingularGuard = 1e-12;

// Expected flux through theta = pi for order parameter b:
// (1 - |b|^2) / (pi |1 + b|^2). Throws NumericalError near b = -1.
double firing_rate(Complex b);

// Fourier coefficient c_m of q(theta) = sin(theta) / (1 + cos(theta) + eps),
// with q(theta) = sum_m c_m e^{i m theta} + c.c.
Complex q_fourier_coefficient(int m, double eps);

// E[q] in the eps -> 0 limit: 2 Im(b) / |1 + b|^2.
double q_expectation(Complex b);

struct RateVoltage {
  double phi;  // firing rate
  double V;    // mean QIF voltage
};

// w = (1 - conj(b)) / (1 + conj(b)) = pi phi + i V.
RateVoltage w_transform(Complex b);
Complex inverse_w_transform(RateVoltage pv);

struct SynapticParams {
  double eta0 = 1.0;
  double delta = 0.05;
  double K = -2.0;
  double tau = 1.0;
  double mean_degree = 0.0;  // <k>; 0 means "use the grid mean"
};

// Degree-based order-parameter system for synaptic coupling. Only the
// in-degree law enters; the out-degree law has no influence on these
// equations, so there is no way to pass one.
//
// State layout: [Re b_0 .. Re b_{n-1}, Im b_0 .. Im b_{n-1}, s].
class SynapticMeanField {
 public:
  SynapticMeanField(DegreeGrid in_grid, SynapticParams params,
                    const kernels::KernelTable& kernels = kernels::active());

  const DegreeGrid& grid() const { return grid_; }
  const SynapticParams& params() const { return params_; }
  double mean_degree() const { return mean_degree_; }
  std::size_t grid_size() const { return grid_.size(); }
  std::size_t dimension() const { return 2 * grid_.size() + 1; }

  std::vector<double> initial_state(Complex b0 = {1.0, 0.0}, double s0 = 0.0) const;
  Complex b(std::span<const double> y, std::size_t j) const {
    return {y[j], y[grid_.size() + j]};
  }
  double s(std::span<const double> y) const { return y[2 * grid_.size()]; }
  // sum_k p(k) F(b(k))
  double mean_rate(std::span<const double> y) const;

  void rhs(std::span<const double> y, std::span<double> dy) const;

 private:
  DegreeGrid grid_;
  SynapticParams params_;
  double mean_degree_;
  const kernels::KernelTable* kernels_;
};

struct GapParams {
  double eta0 = 0.0;
  double delta = 0.01;
  double g = 0.4;
  double mean_degree = 0.0;  // <k>; 0 means "use the grid mean"
  // Leak terms scaled by k/<k> (-g (k/<k>) phi and g (T - (k/<k>) V)), as
  // implied by the -g k/<k> sin(theta) term of the phase velocity. When false
  // the leak is unscaled (-g phi, g (T - V)). Identical for a single degree.
  bool degree_weighted_leak = true;
};

// Degree-based order-parameter system for gap-junction coupling, in the
// real (phi, V) coordinates. State layout: [phi_0 .. phi_{n-1}, V_0 .. V_{n-1}].
class GapMeanField {
 public:
  GapMeanField(DegreeGrid grid, GapParams params);

  const DegreeGrid& grid() const { return grid_; }
  const GapParams& params() const { return params_; }
  double mean_degree() const { return mean_degree_; }
  std::size_t grid_size() const { return grid_.size(); }
  std::size_t dimension() const { return 2 * grid_.size(); }

  // Image of b = 1 with phi nudged by `phi_offset` off the singular point.
  std::vector<double> initial_state(double phi_offset = 1e-3) const;
  // T(k) = (k / <k>^2) sum_k' k' P(k') V(k').
  std::vector<double> coupling_field(std::span<const double> V) const;
  double mean_rate(std::span<const double> y) const;
  double mean_voltage(std::span<const double> y) const;

  void rhs(std::span<const double> y, std::span<double> dy) const;

  // Same dynamics in order-parameter form; state [Re b..., Im b...], with T
  // built from V(k) = q_expectation(b(k)).
  void rhs_order_parameter(std::span<const double> y, std::span<double> dy) const;
  std::vector<double> to_order_parameter(std::span<const double> y) const;
  std::vector<double> from_order_parameter(std::span<const double> z) const;

 private:
  double leak_factor(std::size_t j) const;
  double weighted_moment(std::span<const double> V) const;

  DegreeGrid grid_;
  GapParams params_;
  double mean_degree_;
};

}  // namespace thetanet
