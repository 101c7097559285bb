#include <cmath>
#include <numbers>

#include "kernels_impl.hpp"

namespace thetanet::kernels::scalar {

using std::numbers::pi;

void csr_row_sums(std::span<const std::int32_t> offsets, std::span<const std::int32_t> index,
                  std::span<const double> x, std::span<double> out) {
  const std::size_t rows = out.size();
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::int32_t p = offsets[i]; p < offsets[i + 1]; ++p) acc += x[index[p]];
    out[i] = acc;
  }
}

void theta_step(std::span<double> theta, std::span<const double> drive,
                std::span<const double> leak, double dt, std::span<std::uint8_t> fired) {
  constexpr double two_pi = 2.0 * pi;
  const bool has_leak = !leak.empty();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double th = theta[i];
    const double c = std::cos(th);
    double rate = 1.0 - c + (1.0 + c) * drive[i];
    if (has_leak) rate -= leak[i] * std::sin(th);
    double next = th + dt * rate;
    fired[i] = (th < pi && next >= pi) ? 1 : 0;
    if (next >= two_pi) next -= two_pi;
    else if (next < 0.0) next += two_pi;
    theta[i] = next;
  }
}

void theta_q(std::span<const double> theta, double eps, std::span<double> q) {
  for (std::size_t i = 0; i < theta.size(); ++i)
    q[i] = std::sin(theta[i]) / (1.0 + std::cos(theta[i]) + eps);
}

void morris_lecar_step(const MorrisLecarConstants& c, std::span<double> V, std::span<double> n,
                       std::span<double> s, std::span<const double> drive, double dt,
                       double tau_s) {
  const bool has_s = !s.empty();
  const double dt_over_c = dt / c.C;
  for (std::size_t i = 0; i < V.size(); ++i) {
    const double v = V[i];
    const double m_inf = 0.5 * (1.0 + std::tanh((v - c.V1) / c.V2));
    const double w_inf = 0.5 * (1.0 + std::tanh((v - c.V3) / c.V4));
    const double inv_tau_n = std::cosh((v - c.V3) / (2.0 * c.V4));
    const double current = c.g_L * (c.V_L - v) + c.g_Ca * m_inf * (c.V_Ca - v) +
                           c.g_K * n[i] * (c.V_K - v) + drive[i];
    V[i] = v + dt_over_c * current;
    n[i] += dt * c.lambda0 * (w_inf - n[i]) * inv_tau_n;
    if (has_s) {
      const double s_inf = 1.0 + std::tanh(v / 10.0);
      s[i] += dt / tau_s * (s_inf - s[i]);
    }
  }
}

OaSynapticSums oa_synaptic_rhs(std::span<const double> re, std::span<const double> im,
                               std::span<const double> k, std::span<const double> weights,
                               double delta, double eta0, double coupling,
                               std::span<double> dre, std::span<double> dim) {
  OaSynapticSums sums;
  sums.min_abs1pb_sq = INFINITY;
  for (std::size_t j = 0; j < re.size(); ++j) {
    const double x = re[j];
    const double y = im[j];
    const double omega = eta0 + coupling * k[j];
    const double xm = x - 1.0;
    const double xp = x + 1.0;
    // (b + 1)^2 = A + iB
    const double A = xp * xp - y * y;
    const double B = 2.0 * xp * y;
    dre[j] = xm * y + 0.5 * (-delta * A - omega * B);
    dim[j] = -0.5 * (xm * xm - y * y) + 0.5 * (A * omega - B * delta);
    const double denom = xp * xp + y * y;
    sums.min_abs1pb_sq = std::min(sums.min_abs1pb_sq, denom);
    sums.weighted_rate += weights[j] * (1.0 - x * x - y * y) / (pi * denom);
  }
  return sums;
}

}  // namespace thetanet::kernels::scalar
