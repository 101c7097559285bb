#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace thetanet::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "?";
}

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::scalar,         scalar::csr_row_sums,
                             scalar::theta_step,  scalar::theta_q,
                             scalar::morris_lecar_step, scalar::oa_synaptic_rhs};
  return t;
}

bool avx2_available() {
#if defined(THETANET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const KernelTable& table(Isa isa) {
  if (isa == Isa::scalar) return scalar_table();
#ifdef THETANET_HAVE_AVX2
  if (avx2_available()) {
    static const KernelTable t{Isa::avx2,         avx2::csr_row_sums,
                               avx2::theta_step,  avx2::theta_q,
                               avx2::morris_lecar_step, avx2::oa_synaptic_rhs};
    return t;
  }
#endif
  throw std::runtime_error("AVX2 kernels are not available on this build or CPU");
}

const KernelTable& active() {
  static const KernelTable& chosen = [&]() -> const KernelTable& {
    if (const char* env = std::getenv("THETANET_ISA")) {
      const std::string want(env);
      if (want == "scalar") return scalar_table();
      if (want == "avx2") return table(Isa::avx2);
      throw std::runtime_error("THETANET_ISA must be 'scalar' or 'avx2'");
    }
    return avx2_available() ? table(Isa::avx2) : scalar_table();
  }();
  return chosen;
}

}  // namespace thetanet::kernels
