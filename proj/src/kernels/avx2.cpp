// Compiled with -mavx2 -mfma; only reached through the runtime dispatch in
// dispatch.cpp after a CPUID check.

#include <immintrin.h>

#include <cmath>
#include <numbers>

#include "kernels_impl.hpp"

namespace thetanet::kernels::avx2 {

namespace {

using std::numbers::pi;

// Cephes polynomial coefficients, valid on |r| <= pi/4.
constexpr double kSin[] = {1.58962301576546568060e-10, -2.50507477628578072866e-8,
                           2.75573136213857245213e-6,  -1.98412698295895385996e-4,
                           8.33333333332211858878e-3,  -1.66666666666666307295e-1};
constexpr double kCos[] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9,
                           -2.75573141792967388112e-7,  2.48015872888517045348e-5,
                           -1.38888888888730564116e-3,  4.16666666666665929218e-2};
constexpr double kPio2Hi = 1.5707963267948966;
constexpr double kPio2Lo = 6.123233995736766e-17;

inline __m256d set(double v) { return _mm256_set1_pd(v); }

template <std::size_t N>
inline __m256d horner(__m256d z, const double (&c)[N]) {
  __m256d acc = set(c[0]);
  for (std::size_t i = 1; i < N; ++i) acc = _mm256_fmadd_pd(acc, z, set(c[i]));
  return acc;
}

// sin and cos for moderate |x| (Cody-Waite reduction by pi/2).
inline void sincos_pd(__m256d x, __m256d& s_out, __m256d& c_out) {
  const __m256d j = _mm256_round_pd(_mm256_mul_pd(x, set(2.0 / pi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(j, set(kPio2Hi), x);
  r = _mm256_fnmadd_pd(j, set(kPio2Lo), r);
  const __m256d z = _mm256_mul_pd(r, r);

  const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(r, z), horner(z, kSin), r);
  const __m256d cos_r = _mm256_fmadd_pd(
      _mm256_mul_pd(z, z), horner(z, kCos), _mm256_fnmadd_pd(set(0.5), z, set(1.0)));

  // quadrant q = j mod 4 in {0, 1, 2, 3}
  const __m256d q = _mm256_sub_pd(
      j, _mm256_mul_pd(set(4.0), _mm256_floor_pd(_mm256_mul_pd(j, set(0.25)))));
  const __m256d odd = _mm256_cmp_pd(
      _mm256_sub_pd(q, _mm256_mul_pd(set(2.0), _mm256_floor_pd(_mm256_mul_pd(q, set(0.5))))),
      set(1.0), _CMP_EQ_OQ);
  const __m256d sin_neg = _mm256_cmp_pd(q, set(2.0), _CMP_GE_OQ);
  const __m256d cos_neg = _mm256_or_pd(_mm256_cmp_pd(q, set(1.0), _CMP_EQ_OQ),
                                       _mm256_cmp_pd(q, set(2.0), _CMP_EQ_OQ));
  const __m256d sign_bit = set(-0.0);

  __m256d s = _mm256_blendv_pd(sin_r, cos_r, odd);
  __m256d c = _mm256_blendv_pd(cos_r, sin_r, odd);
  s = _mm256_xor_pd(s, _mm256_and_pd(sin_neg, sign_bit));
  c = _mm256_xor_pd(c, _mm256_and_pd(cos_neg, sign_bit));
  s_out = s;
  c_out = c;
}

// Cephes exp: x = n ln2 + r, Pade approximant on r, scale by 2^n.
inline __m256d exp_pd(__m256d x) {
  constexpr double P[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2,
                          9.99999999999999999910e-1};
  constexpr double Q[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3,
                          2.27265548208155028766e-1, 2.00000000000000000009e0};
  x = _mm256_min_pd(_mm256_max_pd(x, set(-708.0)), set(708.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, set(std::numbers::log2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(n, set(1.42860682030941723212e-6), r);
  const __m256d rr = _mm256_mul_pd(r, r);
  const __m256d px = _mm256_mul_pd(r, horner(rr, P));
  const __m256d qx = horner(rr, Q);
  const __m256d frac = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  const __m256d e = _mm256_fmadd_pd(set(2.0), frac, set(1.0));
  // 2^n: with n + 1023 + 1.5*2^52 the biased exponent sits in the low mantissa
  // bits; shifting left by 52 moves it into the exponent field.
  const __m256d biased = _mm256_add_pd(_mm256_add_pd(n, set(1023.0)), set(0x1.8p52));
  const __m256i bits = _mm256_slli_epi64(_mm256_castpd_si256(biased), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

inline __m256d tanh_pd(__m256d x) {
  // 1 - 2 / (e^{2x} + 1); saturates cleanly through the exp clamp.
  const __m256d e2 = exp_pd(_mm256_add_pd(x, x));
  return _mm256_sub_pd(set(1.0), _mm256_div_pd(set(2.0), _mm256_add_pd(e2, set(1.0))));
}

inline __m256d cosh_pd(__m256d x) {
  const __m256d e = exp_pd(x);
  return _mm256_mul_pd(set(0.5), _mm256_add_pd(e, _mm256_div_pd(set(1.0), e)));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void sincos_array(std::span<const double> x, std::span<double> s, std::span<double> c) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    __m256d vs, vc;
    sincos_pd(_mm256_loadu_pd(&x[i]), vs, vc);
    _mm256_storeu_pd(&s[i], vs);
    _mm256_storeu_pd(&c[i], vc);
  }
  for (; i < x.size(); ++i) {
    s[i] = std::sin(x[i]);
    c[i] = std::cos(x[i]);
  }
}

void exp_array(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) _mm256_storeu_pd(&out[i], exp_pd(_mm256_loadu_pd(&x[i])));
  for (; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

void tanh_array(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) _mm256_storeu_pd(&out[i], tanh_pd(_mm256_loadu_pd(&x[i])));
  for (; i < x.size(); ++i) out[i] = std::tanh(x[i]);
}

void csr_row_sums(std::span<const std::int32_t> offsets, std::span<const std::int32_t> index,
                  std::span<const double> x, std::span<double> out) {
  const double* base = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::int32_t p = offsets[i];
    const std::int32_t end = offsets[i + 1];
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (; p + 8 <= end; p += 8) {
      const __m128i i0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(&index[p]));
      const __m128i i1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(&index[p + 4]));
      acc0 = _mm256_add_pd(acc0, _mm256_i32gather_pd(base, i0, 8));
      acc1 = _mm256_add_pd(acc1, _mm256_i32gather_pd(base, i1, 8));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; p < end; ++p) acc += base[index[p]];
    out[i] = acc;
  }
}

void theta_step(std::span<double> theta, std::span<const double> drive,
                std::span<const double> leak, double dt, std::span<std::uint8_t> fired) {
  constexpr double two_pi = 2.0 * pi;
  const bool has_leak = !leak.empty();
  const __m256d vdt = set(dt);
  std::size_t i = 0;
  for (; i + 4 <= theta.size(); i += 4) {
    const __m256d th = _mm256_loadu_pd(&theta[i]);
    __m256d s, c;
    sincos_pd(th, s, c);
    const __m256d one = set(1.0);
    __m256d rate =
        _mm256_fmadd_pd(_mm256_add_pd(one, c), _mm256_loadu_pd(&drive[i]), _mm256_sub_pd(one, c));
    if (has_leak) rate = _mm256_fnmadd_pd(_mm256_loadu_pd(&leak[i]), s, rate);
    __m256d next = _mm256_fmadd_pd(vdt, rate, th);
    const __m256d crossed = _mm256_and_pd(_mm256_cmp_pd(th, set(pi), _CMP_LT_OQ),
                                          _mm256_cmp_pd(next, set(pi), _CMP_GE_OQ));
    const int mask = _mm256_movemask_pd(crossed);
    for (int l = 0; l < 4; ++l) fired[i + l] = static_cast<std::uint8_t>((mask >> l) & 1);
    const __m256d over = _mm256_cmp_pd(next, set(two_pi), _CMP_GE_OQ);
    const __m256d under = _mm256_cmp_pd(next, _mm256_setzero_pd(), _CMP_LT_OQ);
    next = _mm256_sub_pd(next, _mm256_and_pd(over, set(two_pi)));
    next = _mm256_add_pd(next, _mm256_and_pd(under, set(two_pi)));
    _mm256_storeu_pd(&theta[i], next);
  }
  if (i < theta.size())
    scalar::theta_step(theta.subspan(i), drive.subspan(i),
                       has_leak ? leak.subspan(i) : std::span<const double>{}, dt,
                       fired.subspan(i));
}

void theta_q(std::span<const double> theta, double eps, std::span<double> q) {
  std::size_t i = 0;
  const __m256d denom0 = set(1.0 + eps);
  for (; i + 4 <= theta.size(); i += 4) {
    __m256d s, c;
    sincos_pd(_mm256_loadu_pd(&theta[i]), s, c);
    _mm256_storeu_pd(&q[i], _mm256_div_pd(s, _mm256_add_pd(denom0, c)));
  }
  if (i < theta.size()) scalar::theta_q(theta.subspan(i), eps, q.subspan(i));
}

void morris_lecar_step(const MorrisLecarConstants& c, std::span<double> V, std::span<double> n,
                       std::span<double> s, std::span<const double> drive, double dt,
                       double tau_s) {
  const bool has_s = !s.empty();
  const __m256d half = set(0.5);
  const __m256d one = set(1.0);
  const __m256d dt_over_c = set(dt / c.C);
  const __m256d dt_lambda = set(dt * c.lambda0);
  const __m256d dt_over_tau = set(dt / tau_s);
  std::size_t i = 0;
  for (; i + 4 <= V.size(); i += 4) {
    const __m256d v = _mm256_loadu_pd(&V[i]);
    const __m256d nn = _mm256_loadu_pd(&n[i]);
    const __m256d m_inf = _mm256_mul_pd(
        half, _mm256_add_pd(one, tanh_pd(_mm256_div_pd(_mm256_sub_pd(v, set(c.V1)), set(c.V2)))));
    const __m256d v3 = _mm256_sub_pd(v, set(c.V3));
    const __m256d w_inf =
        _mm256_mul_pd(half, _mm256_add_pd(one, tanh_pd(_mm256_div_pd(v3, set(c.V4)))));
    const __m256d inv_tau_n = cosh_pd(_mm256_div_pd(v3, set(2.0 * c.V4)));
    __m256d current = _mm256_mul_pd(set(c.g_L), _mm256_sub_pd(set(c.V_L), v));
    current = _mm256_fmadd_pd(_mm256_mul_pd(set(c.g_Ca), m_inf), _mm256_sub_pd(set(c.V_Ca), v),
                              current);
    current =
        _mm256_fmadd_pd(_mm256_mul_pd(set(c.g_K), nn), _mm256_sub_pd(set(c.V_K), v), current);
    current = _mm256_add_pd(current, _mm256_loadu_pd(&drive[i]));
    _mm256_storeu_pd(&V[i], _mm256_fmadd_pd(dt_over_c, current, v));
    const __m256d dn = _mm256_mul_pd(_mm256_sub_pd(w_inf, nn), inv_tau_n);
    _mm256_storeu_pd(&n[i], _mm256_fmadd_pd(dt_lambda, dn, nn));
    if (has_s) {
      const __m256d ss = _mm256_loadu_pd(&s[i]);
      const __m256d s_inf = _mm256_add_pd(one, tanh_pd(_mm256_mul_pd(v, set(0.1))));
      _mm256_storeu_pd(&s[i], _mm256_fmadd_pd(dt_over_tau, _mm256_sub_pd(s_inf, ss), ss));
    }
  }
  if (i < V.size())
    scalar::morris_lecar_step(c, V.subspan(i), n.subspan(i),
                              has_s ? s.subspan(i) : std::span<double>{}, drive.subspan(i), dt,
                              tau_s);
}

OaSynapticSums oa_synaptic_rhs(std::span<const double> re, std::span<const double> im,
                               std::span<const double> k, std::span<const double> weights,
                               double delta, double eta0, double coupling,
                               std::span<double> dre, std::span<double> dim) {
  const __m256d one = set(1.0);
  const __m256d half = set(0.5);
  const __m256d vdelta = set(delta);
  __m256d rate_acc = _mm256_setzero_pd();
  __m256d min_denom = set(INFINITY);
  std::size_t j = 0;
  for (; j + 4 <= re.size(); j += 4) {
    const __m256d x = _mm256_loadu_pd(&re[j]);
    const __m256d y = _mm256_loadu_pd(&im[j]);
    const __m256d omega = _mm256_fmadd_pd(set(coupling), _mm256_loadu_pd(&k[j]), set(eta0));
    const __m256d xm = _mm256_sub_pd(x, one);
    const __m256d xp = _mm256_add_pd(x, one);
    const __m256d yy = _mm256_mul_pd(y, y);
    const __m256d A = _mm256_fmsub_pd(xp, xp, yy);
    const __m256d B = _mm256_mul_pd(_mm256_add_pd(xp, xp), y);
    // xm*y + 0.5*(-delta*A - omega*B)
    const __m256d t_re =
        _mm256_fnmadd_pd(vdelta, A, _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), omega), B));
    _mm256_storeu_pd(&dre[j], _mm256_fmadd_pd(half, t_re, _mm256_mul_pd(xm, y)));
    // -0.5*(xm^2 - y^2) + 0.5*(A*omega - B*delta)
    const __m256d t_im = _mm256_fmsub_pd(A, omega, _mm256_mul_pd(B, vdelta));
    const __m256d q = _mm256_fmsub_pd(xm, xm, yy);
    _mm256_storeu_pd(&dim[j], _mm256_mul_pd(half, _mm256_sub_pd(t_im, q)));
    const __m256d denom = _mm256_fmadd_pd(xp, xp, yy);
    min_denom = _mm256_min_pd(min_denom, denom);
    const __m256d num = _mm256_sub_pd(_mm256_sub_pd(one, _mm256_mul_pd(x, x)), yy);
    rate_acc = _mm256_fmadd_pd(_mm256_loadu_pd(&weights[j]),
                               _mm256_div_pd(num, _mm256_mul_pd(set(pi), denom)), rate_acc);
  }
  OaSynapticSums sums;
  sums.weighted_rate = hsum(rate_acc);
  alignas(32) double mins[4];
  _mm256_store_pd(mins, min_denom);
  sums.min_abs1pb_sq = std::min(std::min(mins[0], mins[1]), std::min(mins[2], mins[3]));
  if (j < re.size()) {
    const auto tail = scalar::oa_synaptic_rhs(re.subspan(j), im.subspan(j), k.subspan(j),
                                              weights.subspan(j), delta, eta0, coupling,
                                              dre.subspan(j), dim.subspan(j));
    sums.weighted_rate += tail.weighted_rate;
    sums.min_abs1pb_sq = std::min(sums.min_abs1pb_sq, tail.min_abs1pb_sq);
  }
  return sums;
}

}  // namespace thetanet::kernels::avx2
