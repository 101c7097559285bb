#include "thetanet/meanfield.hpp"

#include <cmath>
#include <numbers>

#include "thetanet/error.hpp"

namespace thetanet {

using std::numbers::pi;

namespace {

double checked_abs1pb_sq(Complex b) {
  const double d = std::norm(1.0 + b);
  if (!(d >= kSingularGuard * kSingularGuard))
    throw NumericalError("order parameter at the singular point b = -1");
  return d;
}

double resolve_mean_degree(double requested, const DegreeGrid& grid) {
  if (requested < 0.0) throw ConfigError("mean degree must be nonnegative");
  return requested > 0.0 ? requested : grid.mean();
}

void check_grid(const DegreeGrid& grid) {
  if (grid.points.empty() || grid.points.size() != grid.weights.size())
    throw ConfigError("degree grid is empty or inconsistent");
}

}  // namespace

double firing_rate(Complex b) { return (1.0 - std::norm(b)) / (pi * checked_abs1pb_sq(b)); }

Complex q_fourier_coefficient(int m, double eps) {
  if (m < 1) throw ConfigError("Fourier index m must be positive");
  if (!(eps > 0.0)) throw ConfigError("regularization eps must be positive");
  const double root = std::sqrt(2.0 * eps + eps * eps);
  const double r = root - 1.0 - eps;
  return Complex(0.0, (std::pow(r, m + 1) - std::pow(r, m - 1)) / (2.0 * root));
}

double q_expectation(Complex b) { return 2.0 * b.imag() / checked_abs1pb_sq(b); }

RateVoltage w_transform(Complex b) {
  const Complex bc = std::conj(b);
  checked_abs1pb_sq(b);
  const Complex w = (1.0 - bc) / (1.0 + bc);
  return {w.real() / pi, w.imag()};
}

Complex inverse_w_transform(RateVoltage pv) {
  const Complex wc(pi * pv.phi, -pv.V);
  if (std::abs(1.0 + wc) < kSingularGuard) throw NumericalError("w = -1 has no preimage");
  return (1.0 - wc) / (1.0 + wc);
}

SynapticMeanField::SynapticMeanField(DegreeGrid in_grid, SynapticParams params,
                                     const kernels::KernelTable& kernels)
    : grid_(std::move(in_grid)), params_(params), kernels_(&kernels) {
  check_grid(grid_);
  if (!(params_.tau > 0.0)) throw ConfigError("synaptic time constant tau must be positive");
  if (!(params_.delta >= 0.0)) throw ConfigError("Lorentzian width delta must be nonnegative");
  mean_degree_ = resolve_mean_degree(params_.mean_degree, grid_);
}

std::vector<double> SynapticMeanField::initial_state(Complex b0, double s0) const {
  const std::size_t n = grid_.size();
  std::vector<double> y(dimension());
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = b0.real();
    y[n + j] = b0.imag();
  }
  y[2 * n] = s0;
  return y;
}

double SynapticMeanField::mean_rate(std::span<const double> y) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid_.size(); ++j) acc += grid_.weights[j] * firing_rate(b(y, j));
  return acc;
}

void SynapticMeanField::rhs(std::span<const double> y, std::span<double> dy) const {
  const std::size_t n = grid_.size();
  const double s = y[2 * n];
  const double coupling = params_.K * s / mean_degree_;
  const auto sums =
      kernels_->oa_synaptic_rhs(y.subspan(0, n), y.subspan(n, n), grid_.points, grid_.weights,
                                params_.delta, params_.eta0, coupling, dy.subspan(0, n),
                                dy.subspan(n, n));
  if (!(sums.min_abs1pb_sq >= kSingularGuard * kSingularGuard))
    throw NumericalError("order parameter at the singular point b = -1");
  dy[2 * n] = (sums.weighted_rate - s) / params_.tau;
}

GapMeanField::GapMeanField(DegreeGrid grid, GapParams params)
    : grid_(std::move(grid)), params_(params) {
  check_grid(grid_);
  if (!(params_.g >= 0.0)) throw ConfigError("gap coupling g must be nonnegative");
  if (!(params_.delta >= 0.0)) throw ConfigError("Lorentzian width delta must be nonnegative");
  mean_degree_ = resolve_mean_degree(params_.mean_degree, grid_);
}

double GapMeanField::leak_factor(std::size_t j) const {
  return params_.degree_weighted_leak ? grid_.points[j] / mean_degree_ : 1.0;
}

std::vector<double> GapMeanField::initial_state(double phi_offset) const {
  const auto pv = w_transform(Complex(1.0, 0.0));
  std::vector<double> y(dimension());
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    y[j] = pv.phi + phi_offset;
    y[grid_.size() + j] = pv.V;
  }
  return y;
}

// sum_k' (k'/<k>) P(k') V(k'); written with the ratio so that a single
// degree gives T = V without rounding.
double GapMeanField::weighted_moment(std::span<const double> V) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid_.size(); ++j)
    acc += grid_.points[j] / mean_degree_ * grid_.weights[j] * V[j];
  return acc;
}

std::vector<double> GapMeanField::coupling_field(std::span<const double> V) const {
  const double moment = weighted_moment(V);
  std::vector<double> T(grid_.size());
  for (std::size_t j = 0; j < grid_.size(); ++j) T[j] = grid_.points[j] / mean_degree_ * moment;
  return T;
}

double GapMeanField::mean_rate(std::span<const double> y) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid_.size(); ++j) acc += grid_.weights[j] * y[j];
  return acc;
}

double GapMeanField::mean_voltage(std::span<const double> y) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < grid_.size(); ++j) acc += grid_.weights[j] * y[grid_.size() + j];
  return acc;
}

void GapMeanField::rhs(std::span<const double> y, std::span<double> dy) const {
  const std::size_t n = grid_.size();
  const auto V = y.subspan(n, n);
  const double moment = weighted_moment(V);
  const double g = params_.g;
  for (std::size_t j = 0; j < n; ++j) {
    const double phi = y[j];
    const double v = V[j];
    const double lam = leak_factor(j);
    const double T = grid_.points[j] / mean_degree_ * moment;
    dy[j] = params_.delta / pi + 2.0 * phi * v - g * lam * phi;
    dy[n + j] = params_.eta0 - pi * pi * phi * phi + v * v + g * (T - lam * v);
  }
}

void GapMeanField::rhs_order_parameter(std::span<const double> y, std::span<double> dy) const {
  const std::size_t n = grid_.size();
  std::vector<double> V(n);
  for (std::size_t j = 0; j < n; ++j) V[j] = q_expectation({y[j], y[n + j]});
  const auto T = coupling_field(V);
  const Complex i(0.0, 1.0);
  const Complex a(-params_.delta, params_.eta0);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex b(y[j], y[n + j]);
    const Complex bp2 = (1.0 + b) * (1.0 + b);
    const Complex db = 0.5 * (a * bp2 - i * (1.0 - b) * (1.0 - b)) +
                       0.5 * params_.g * (i * bp2 * T[j] + leak_factor(j) * (1.0 - b * b));
    dy[j] = db.real();
    dy[n + j] = db.imag();
  }
}

std::vector<double> GapMeanField::to_order_parameter(std::span<const double> y) const {
  const std::size_t n = grid_.size();
  std::vector<double> z(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex b = inverse_w_transform({y[j], y[n + j]});
    z[j] = b.real();
    z[n + j] = b.imag();
  }
  return z;
}

std::vector<double> GapMeanField::from_order_parameter(std::span<const double> z) const {
  const std::size_t n = grid_.size();
  std::vector<double> y(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto pv = w_transform({z[j], z[n + j]});
    y[j] = pv.phi;
    y[n + j] = pv.V;
  }
  return y;
}

}  // namespace thetanet
