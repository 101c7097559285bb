// Equivalence of the SIMD kernels against the scalar references.

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kernels/kernels_impl.hpp"
#include "thetanet/random.hpp"

using namespace thetanet;
using namespace thetanet::kernels;
using std::numbers::pi;

namespace {

std::vector<double> uniform_vec(std::size_t n, double lo, double hi, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * uniform01(rng);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(scalar_table().isa == Isa::scalar);
  CHECK(table(Isa::scalar).csr_row_sums == scalar_table().csr_row_sums);
  CHECK(active().csr_row_sums != nullptr);
}

#ifdef THETANET_HAVE_AVX2

TEST_CASE("avx2 vector math matches libm") {
  if (!avx2_available()) return;
  Rng rng(1);
  auto x = uniform_vec(4003, -2.0 * pi, 4.0 * pi, rng);
  std::vector<double> s(x.size()), c(x.size());
  avx2::sincos_array(x, s, c);
  double es = 0, ec = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    es = std::max(es, std::abs(s[i] - std::sin(x[i])));
    ec = std::max(ec, std::abs(c[i] - std::cos(x[i])));
  }
  CHECK(es < 4e-16);
  CHECK(ec < 4e-16);
  // exact quadrant boundaries
  const std::vector<double> special{0.0, 0.5 * pi, pi, 1.5 * pi};
  std::vector<double> ss(4), cc(4);
  avx2::sincos_array(special, ss, cc);
  CHECK(ss[0] == 0.0);
  CHECK(cc[0] == 1.0);
  CHECK(cc[2] == -1.0);

  auto y = uniform_vec(4001, -40.0, 40.0, rng);
  std::vector<double> e(y.size()), t(y.size());
  avx2::exp_array(y, e);
  avx2::tanh_array(y, t);
  double rel = 0, et = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    rel = std::max(rel, std::abs(e[i] / std::exp(y[i]) - 1.0));
    et = std::max(et, std::abs(t[i] - std::tanh(y[i])));
  }
  CHECK(rel < 4e-16);
  CHECK(et < 4e-16);
  const std::vector<double> huge{800.0, -800.0, 0.0, 1.0};
  std::vector<double> th(4);
  avx2::tanh_array(huge, th);
  CHECK(th[0] == 1.0);
  CHECK(th[1] == -1.0);
  CHECK(th[2] == 0.0);
}

TEST_CASE("avx2 kernels agree with scalar kernels") {
  if (!avx2_available()) return;
  const auto& sc = scalar_table();
  const auto& vx = table(Isa::avx2);
  Rng rng(2);

  SUBCASE("csr_row_sums") {
    const int rows = 37;
    std::vector<std::int32_t> offsets{0};
    std::vector<std::int32_t> index;
    for (int r = 0; r < rows; ++r) {
      const int len = static_cast<int>(uniform_index(rng, 130));
      for (int p = 0; p < len; ++p) index.push_back(static_cast<std::int32_t>(uniform_index(rng, 500)));
      offsets.push_back(static_cast<std::int32_t>(index.size()));
    }
    const auto x = uniform_vec(500, 0.0, 2.0, rng);
    std::vector<double> a(rows), b(rows);
    sc.csr_row_sums(offsets, index, x, a);
    vx.csr_row_sums(offsets, index, x, b);
    CHECK(max_abs_diff(a, b) < 1e-12);
  }

  SUBCASE("theta_step with and without leak") {
    const std::size_t n = 1001;
    auto theta = uniform_vec(n, 0.0, 2.0 * pi, rng);
    // put a few phases just below pi so crossings occur
    for (std::size_t i = 0; i < 40; ++i) theta[i * 7] = pi - 1e-4 * uniform01(rng);
    const auto drive = uniform_vec(n, -1.0, 2.0, rng);
    const auto leak = uniform_vec(n, 0.0, 0.8, rng);
    for (bool with_leak : {false, true}) {
      auto ta = theta, tb = theta;
      std::vector<std::uint8_t> fa(n), fb(n);
      const std::span<const double> lk = with_leak ? std::span<const double>(leak)
                                                   : std::span<const double>{};
      for (int step = 0; step < 50; ++step) {
        sc.theta_step(ta, drive, lk, 1e-3, fa);
        vx.theta_step(tb, drive, lk, 1e-3, fb);
        CHECK(fa == fb);
      }
      CHECK(max_abs_diff(ta, tb) < 1e-12);
    }
  }

  SUBCASE("theta_q") {
    const auto theta = uniform_vec(203, 0.0, 2.0 * pi, rng);
    std::vector<double> a(theta.size()), b(theta.size());
    sc.theta_q(theta, 0.01, a);
    vx.theta_q(theta, 0.01, b);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(std::abs(a[i] - b[i]) <= 1e-13 * std::max(1.0, std::abs(a[i])));
  }

  SUBCASE("morris_lecar_step") {
    const std::size_t n = 203;
    const MorrisLecarConstants c;
    auto V = uniform_vec(n, -70.0, 40.0, rng);
    auto nn = uniform_vec(n, 0.0, 1.0, rng);
    auto s = uniform_vec(n, 0.0, 2.0, rng);
    const auto drive = uniform_vec(n, 30.0, 50.0, rng);
    auto V2 = V, n2 = nn, s2 = s;
    for (int step = 0; step < 100; ++step) {
      sc.morris_lecar_step(c, V, nn, s, drive, 0.01, 20.0);
      vx.morris_lecar_step(c, V2, n2, s2, drive, 0.01, 20.0);
    }
    CHECK(max_abs_diff(V, V2) < 1e-11);
    CHECK(max_abs_diff(nn, n2) < 1e-13);
    CHECK(max_abs_diff(s, s2) < 1e-13);
    // gap variant: no synaptic variable
    vx.morris_lecar_step(c, V2, n2, {}, drive, 0.01, 20.0);
    sc.morris_lecar_step(c, V, nn, {}, drive, 0.01, 20.0);
    CHECK(max_abs_diff(V, V2) < 1e-11);
  }

  SUBCASE("oa_synaptic_rhs") {
    const std::size_t n = 101;
    std::vector<double> re(n), im(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = 0.99 * std::sqrt(uniform01(rng));
      const double a = 2.0 * pi * uniform01(rng);
      re[j] = r * std::cos(a);
      im[j] = r * std::sin(a);
    }
    const auto k = uniform_vec(n, 50.0, 150.0, rng);
    const std::vector<double> w(n, 1.0 / n);
    std::vector<double> dra(n), dia(n), drb(n), dib(n);
    const auto sa = sc.oa_synaptic_rhs(re, im, k, w, 0.05, 1.0, -0.004, dra, dia);
    const auto sb = vx.oa_synaptic_rhs(re, im, k, w, 0.05, 1.0, -0.004, drb, dib);
    CHECK(max_abs_diff(dra, drb) < 1e-14);
    CHECK(max_abs_diff(dia, dib) < 1e-14);
    CHECK(sa.weighted_rate == doctest::Approx(sb.weighted_rate).epsilon(1e-13));
    CHECK(sa.min_abs1pb_sq == doctest::Approx(sb.min_abs1pb_sq).epsilon(1e-14));
  }
}

#endif
