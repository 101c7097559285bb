#pragma once

// Inner-loop kernels shared by the network simulators and the synaptic mean
// field. Every kernel has a scalar reference implementation; an AVX2+FMA
// variant is compiled on x86-64 and picked at runtime when the CPU supports
// it. The variants agree to rounding (see tests/unit/test_kernels.cpp), not
// bit for bit, so a run is reproducible for a fixed kernel table.

#include <cstdint>
#include <span>
#include <string_view>

namespace thetanet::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct MorrisLecarConstants {
  double C = 20.0;
  double g_L = 2.0;
  double g_Ca = 4.0;
  double g_K = 8.0;
  double V_L = -60.0;
  double V_Ca = 120.0;
  double V_K = -80.0;
  double V1 = -1.2;
  double V2 = 18.0;
  double V3 = 12.0;
  double V4 = 17.4;
  double lambda0 = 1.0 / 15.0;  // 1/ms
};

// Result of one evaluation of the synaptic order-parameter field.
struct OaSynapticSums {
  double weighted_rate = 0.0;      // sum_k w(k) F(b(k))
  double min_abs1pb_sq = 0.0;      // min_k |1 + b(k)|^2, for the singularity guard
};

struct KernelTable {
  Isa isa;

  // out[i] = sum over p in [offsets[i], offsets[i+1]) of x[index[p]].
  void (*csr_row_sums)(std::span<const std::int32_t> offsets,
                       std::span<const std::int32_t> index, std::span<const double> x,
                       std::span<double> out);

  // Euler step of d(theta)/dt = 1 - cos + (1 + cos) * drive - leak * sin,
  // wrapping to [0, 2 pi). fired[i] = 1 when theta increased through pi.
  // `leak` may be empty (synaptic coupling).
  void (*theta_step)(std::span<double> theta, std::span<const double> drive,
                     std::span<const double> leak, double dt, std::span<std::uint8_t> fired);

  // q[i] = sin(theta[i]) / (1 + cos(theta[i]) + eps).
  void (*theta_q)(std::span<const double> theta, double eps, std::span<double> q);

  // Euler step of the Morris-Lecar V, n and (if non-empty) s equations.
  // drive[i] is I0 + I_i + coupling current, in the same units as g * V.
  void (*morris_lecar_step)(const MorrisLecarConstants& c, std::span<double> V,
                            std::span<double> n, std::span<double> s,
                            std::span<const double> drive, double dt, double tau_s);

  // d(b)/dt for the synaptic order parameters on the degree grid:
  //   -i (b - 1)^2 / 2 + (b + 1)^2 / 2 * (-delta + i (eta0 + coupling * k)),
  // with b = re + i im, plus the weighted firing-rate sum.
  OaSynapticSums (*oa_synaptic_rhs)(std::span<const double> re, std::span<const double> im,
                                    std::span<const double> k, std::span<const double> weights,
                                    double delta, double eta0, double coupling,
                                    std::span<double> dre, std::span<double> dim);
};

const KernelTable& scalar_table();
bool avx2_available();
// Throws std::runtime_error when the ISA is not compiled in or not supported.
const KernelTable& table(Isa isa);
// Best supported table, overridable with THETANET_ISA=scalar|avx2.
const KernelTable& active();

}  // namespace thetanet::kernels
