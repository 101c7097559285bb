#pragma once

#include "thetanet/kernels.hpp"

namespace thetanet::kernels {

namespace scalar {
void csr_row_sums(std::span<const std::int32_t> offsets, std::span<const std::int32_t> index,
                  std::span<const double> x, std::span<double> out);
void theta_step(std::span<double> theta, std::span<const double> drive,
                std::span<const double> leak, double dt, std::span<std::uint8_t> fired);
void theta_q(std::span<const double> theta, double eps, std::span<double> q);
void morris_lecar_step(const MorrisLecarConstants& c, std::span<double> V, std::span<double> n,
                       std::span<double> s, std::span<const double> drive, double dt,
                       double tau_s);
OaSynapticSums oa_synaptic_rhs(std::span<const double> re, std::span<const double> im,
                               std::span<const double> k, std::span<const double> weights,
                               double delta, double eta0, double coupling,
                               std::span<double> dre, std::span<double> dim);
}  // namespace scalar

#ifdef THETANET_HAVE_AVX2
namespace avx2 {
void csr_row_sums(std::span<const std::int32_t> offsets, std::span<const std::int32_t> index,
                  std::span<const double> x, std::span<double> out);
void theta_step(std::span<double> theta, std::span<const double> drive,
                std::span<const double> leak, double dt, std::span<std::uint8_t> fired);
void theta_q(std::span<const double> theta, double eps, std::span<double> q);
void morris_lecar_step(const MorrisLecarConstants& c, std::span<double> V, std::span<double> n,
                       std::span<double> s, std::span<const double> drive, double dt,
                       double tau_s);
OaSynapticSums oa_synaptic_rhs(std::span<const double> re, std::span<const double> im,
                               std::span<const double> k, std::span<const double> weights,
                               double delta, double eta0, double coupling,
                               std::span<double> dre, std::span<double> dim);

// Vector math exposed for the accuracy tests.
void sincos_array(std::span<const double> x, std::span<double> s, std::span<double> c);
void exp_array(std::span<const double> x, std::span<double> out);
void tanh_array(std::span<const double> x, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace thetanet::kernels
