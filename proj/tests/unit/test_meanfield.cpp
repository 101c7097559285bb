#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "thetanet/error.hpp"
#include "thetanet/integrate.hpp"
#include "thetanet/meanfield.hpp"
#include "thetanet/random.hpp"

using namespace thetanet;
using std::numbers::pi;

namespace {

Rhs autonomous(const SynapticMeanField& mf) {
  return [&mf](double, std::span<const double> y, std::span<double> dy) { mf.rhs(y, dy); };
}
Rhs autonomous(const GapMeanField& mf) {
  return [&mf](double, std::span<const double> y, std::span<double> dy) { mf.rhs(y, dy); };
}

struct WindowStats {
  double mean = 0, stddev = 0;
  std::vector<double> up_crossings;
};

// s(t) over [t_lo, t_hi], sampled at every step.
WindowStats s_window(const SynapticMeanField& mf, double dt, double t_lo, double t_hi) {
  auto y = mf.initial_state();
  std::vector<double> ts, ss;
  IntegrateOptions opts;
  opts.dt = dt;
  integrate(autonomous(mf), y, 0.0, t_hi, opts, [&](double t, std::span<const double> v) {
    if (t >= t_lo - 1e-9) {
      ts.push_back(t);
      ss.push_back(mf.s(v));
    }
    return true;
  });
  WindowStats w;
  w.mean = std::accumulate(ss.begin(), ss.end(), 0.0) / ss.size();
  double var = 0;
  for (double s : ss) var += (s - w.mean) * (s - w.mean);
  w.stddev = std::sqrt(var / ss.size());
  for (std::size_t i = 1; i < ss.size(); ++i)
    if (ss[i - 1] < w.mean && ss[i] >= w.mean)
      w.up_crossings.push_back(ts[i - 1] + (w.mean - ss[i - 1]) / (ss[i] - ss[i - 1]) * dt);
  return w;
}

double mean_period(const std::vector<double>& crossings) {
  REQUIRE(crossings.size() >= 3);
  return (crossings.back() - crossings.front()) / (crossings.size() - 1);
}

Complex random_in_disk(Rng& rng, double rmax) {
  const double r = rmax * std::sqrt(uniform01(rng));
  const double a = 2.0 * pi * uniform01(rng);
  return std::polar(r, a);
}

// c_m = (1/2pi) int_0^{2pi} q(theta) e^{-i m theta} dtheta by the trapezoid
// rule, which is spectrally accurate for smooth periodic integrands.
Complex fourier_oracle(int m, double eps) {
  const int n = 20000;
  Complex acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double th = 2.0 * pi * j / n;
    const double q = std::sin(th) / (1.0 + std::cos(th) + eps);
    acc += q * std::exp(Complex(0.0, -m * th));
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("firing_rate closed forms") {
  CHECK(firing_rate(0.0) == doctest::Approx(1.0 / pi).epsilon(1e-15));
  CHECK(firing_rate(1.0) == 0.0);
  CHECK(firing_rate(-0.5) == doctest::Approx(3.0 / pi).epsilon(1e-15));
  CHECK_THROWS_AS(firing_rate(-1.0), NumericalError);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Complex b = random_in_disk(rng, 1.0);
    const double F = firing_rate(b);
    CHECK(F >= 0.0);
    // Re((1 - conj b) / (1 + conj b)) / pi
    CHECK(F == doctest::Approx(((1.0 - std::conj(b)) / (1.0 + std::conj(b))).real() / pi)
                   .epsilon(1e-10));
  }
}

TEST_CASE("q Fourier coefficients") {
  CHECK(std::abs(q_fourier_coefficient(1, 1e-12) - Complex(0, -1)) < 1e-5);
  // c_m = i r^m with r = sqrt(2 eps + eps^2) - 1 - eps, so the distance to the
  // limit is m sqrt(2 eps) to leading order.
  const double d2 = std::abs(q_fourier_coefficient(2, 1e-6) - Complex(0, 1));
  CHECK(d2 == doctest::Approx(2.0 * std::sqrt(2e-6)).epsilon(1e-3));
  CHECK(d2 < 3e-3);
  for (int m : {1, 2, 5}) {
    CAPTURE(m);
    CHECK(std::abs(q_fourier_coefficient(m, 0.01) - fourier_oracle(m, 0.01)) < 1e-8);
  }
  // convergence to i(-1)^m as eps shrinks
  for (int m = 1; m <= 4; ++m) {
    const Complex limit(0.0, m % 2 ? -1.0 : 1.0);
    double prev = 1e9;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
      const double err = std::abs(q_fourier_coefficient(m, eps) - limit);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-3);
  }
  CHECK_THROWS_AS(q_fourier_coefficient(1, 0.0), ConfigError);
}

TEST_CASE("q_expectation: closed form and geometric series") {
  CHECK(q_expectation(0.3) == 0.0);
  CHECK(q_expectation(Complex(0, 0.5)) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(q_expectation(-1.0), NumericalError);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Complex b = std::polar(0.9, 2.0 * pi * uniform01(rng));
    auto partial = [&](int terms) {
      double acc = 0.0;
      Complex bm = 1.0;
      for (int m = 1; m <= terms; ++m) {
        bm *= b;
        acc += (Complex(0, m % 2 ? -1.0 : 1.0) * (bm - std::conj(bm))).real();
      }
      return acc;
    };
    // Remainder after M terms is bounded by 2 |b|^{M+1} / (1 - |b|).
    const double tail200 = 2.0 * std::pow(0.9, 201) / 0.1;
    CHECK(std::abs(q_expectation(b) - partial(200)) <= tail200 + 1e-12);
    CHECK(std::abs(q_expectation(b) - partial(400)) < 1e-10);
  }
}

TEST_CASE("w transform") {
  auto z = w_transform(0.0);
  CHECK(z.phi == doctest::Approx(1.0 / pi));
  CHECK(z.V == 0.0);
  z = w_transform(1.0);
  CHECK(z.phi == 0.0);
  CHECK(z.V == 0.0);
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Complex b = random_in_disk(rng, 0.999);
    const auto pv = w_transform(b);
    CHECK(std::abs(inverse_w_transform(pv) - b) < 1e-12);
    CHECK(pv.phi == doctest::Approx(firing_rate(b)).epsilon(1e-12));
    CHECK(pv.V == doctest::Approx(q_expectation(b)).epsilon(1e-12));
  }
}

TEST_CASE("synaptic rhs: analytic fixed point and singular guard") {
  const auto grid = DegreeDistribution::uniform_width(100, 50).discretize(100);
  SynapticMeanField mf(grid, {.eta0 = 1.0, .delta = 0.0, .K = 0.0, .tau = 1.0});
  auto y = mf.initial_state(0.0, 1.0 / pi);
  std::vector<double> dy(mf.dimension());
  mf.rhs(y, dy);
  for (double d : dy) CHECK(std::abs(d) < 1e-15);

  y[0] = -1.0;
  CHECK_THROWS_AS(mf.rhs(y, dy), NumericalError);
  CHECK_THROWS_AS(SynapticMeanField(grid, {.tau = 0.0}), ConfigError);
}

TEST_CASE("synaptic system: oscillation for narrow, death for wide in-degree law") {
  const SynapticParams p{.eta0 = 1.0, .delta = 0.05, .K = -2.0, .tau = 1.0};
  const SynapticMeanField narrow(DegreeDistribution::uniform_width(100, 5).discretize(), p);
  const SynapticMeanField wide(DegreeDistribution::uniform_width(100, 50).discretize(), p);
  const auto a = s_window(narrow, 0.01, 30.0, 40.0);
  const auto a_late = s_window(narrow, 0.01, 90.0, 100.0);
  CHECK(a.stddev > 5e-3);
  CHECK(a_late.stddev > 5e-3);
  // From b = 1 the broad system is still ringing down at t = 30 (std ~ 9e-3);
  // it settles below 1e-4 by t = 90.
  const auto b = s_window(wide, 0.01, 90.0, 100.0);
  CHECK(b.stddev < 1e-4);
  CHECK(b.mean == doctest::Approx(0.231617).epsilon(1e-5));
}

TEST_CASE("synaptic system: oscillation period is stable under step halving") {
  const SynapticMeanField mf(DegreeDistribution::uniform_width(100, 5).discretize(),
                             {.eta0 = 1.0, .delta = 0.05, .K = -2.0, .tau = 1.0});
  const double p1 = mean_period(s_window(mf, 0.01, 20.0, 60.0).up_crossings);
  const double p2 = mean_period(s_window(mf, 0.005, 20.0, 60.0).up_crossings);
  CHECK(std::abs(p1 / p2 - 1.0) < 1e-3);
}

TEST_CASE("synaptic system: unit disk and s >= 0 are forward invariant") {
  Rng rng(17);
  double worst = 0.0;
  double min_s = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto grid = DegreeDistribution::uniform_width(100, 50 * uniform01(rng)).discretize(8);
    const SynapticParams p{.eta0 = -2.0 + 4.0 * uniform01(rng),
                           .delta = 0.01 + 0.2 * uniform01(rng),
                           .K = -5.0 + 10.0 * uniform01(rng),
                           .tau = 0.5 + 1.5 * uniform01(rng)};
    const SynapticMeanField mf(grid, p);
    std::vector<double> y(mf.dimension());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const Complex b = random_in_disk(rng, 0.99);
      y[j] = b.real();
      y[grid.size() + j] = b.imag();
    }
    y.back() = uniform01(rng);
    integrate(autonomous(mf), y, 0.0, 10.0, {}, [&](double, std::span<const double> v) {
      for (std::size_t j = 0; j < grid.size(); ++j) worst = std::max(worst, std::abs(mf.b(v, j)));
      min_s = std::min(min_s, mf.s(v));
      return true;
    });
  }
  CHECK(worst <= 1.0 + 1e-6);
  CHECK(min_s >= 0.0);
}

TEST_CASE("gap rhs: analytic fixed point") {
  const auto grid = DegreeDistribution::uniform_width(100, 40).discretize(20);
  const GapMeanField mf(grid, {.eta0 = 1.0, .delta = 0.0, .g = 0.0});
  std::vector<double> y(mf.dimension());
  std::fill(y.begin(), y.begin() + 20, 1.0 / pi);
  std::vector<double> dy(mf.dimension());
  mf.rhs(y, dy);
  for (double d : dy) CHECK(std::abs(d) < 1e-15);
}

TEST_CASE("gap system: a single degree reduces to two ODEs") {
  const auto grid = DegreeDistribution::degenerate(100).discretize();
  for (bool weighted : {true, false}) {
    const GapMeanField mf(grid, {.eta0 = 0.3, .delta = 0.05, .g = 0.7,
                                 .degree_weighted_leak = weighted});
    const std::vector<double> y{0.21, -0.37};
    CHECK(mf.coupling_field(std::span(y).subspan(1))[0] == y[1]);
    std::vector<double> dy(2);
    mf.rhs(y, dy);
    // T = V, so the coupling drops out of dV/dt entirely
    CHECK(dy[0] == doctest::Approx(0.05 / pi + 2 * 0.21 * -0.37 - 0.7 * 0.21).epsilon(1e-15));
    CHECK(dy[1] == doctest::Approx(0.3 - pi * pi * 0.21 * 0.21 + 0.37 * 0.37).epsilon(1e-15));
  }
}

TEST_CASE("gap system: invariance under degree scaling") {
  const auto grid = DegreeDistribution::uniform_width(100, 40).discretize(25);
  auto scaled = grid;
  for (auto& k : scaled.points) k *= 2.0;
  const GapParams p{.eta0 = 0.2, .delta = 0.05, .g = 0.4};
  const GapMeanField a(grid, p), b(scaled, p);
  Rng rng(5);
  std::vector<double> V(grid.size());
  for (auto& v : V) v = uniform01(rng) - 0.5;
  CHECK(a.coupling_field(V) == b.coupling_field(V));

  auto ya = a.initial_state(), yb = b.initial_state();
  integrate(autonomous(a), ya, 0.0, 20.0);
  integrate(autonomous(b), yb, 0.0, 20.0);
  CHECK(ya == yb);
}

TEST_CASE("gap system: (phi, V) and order-parameter forms are equivalent") {
  const auto grid = DegreeDistribution::uniform_width(100, 40).discretize(12);
  for (bool weighted : {true, false}) {
    const GapMeanField mf(grid, {.eta0 = 0.2, .delta = 0.05, .g = 0.4,
                                 .degree_weighted_leak = weighted});
    const std::size_t n = grid.size();
    std::vector<double> y(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = 0.05 + 0.01 * j;
      y[n + j] = -0.3 + 0.05 * j;
    }
    auto z = mf.to_order_parameter(y);
    const Rhs fb = [&mf](double, std::span<const double> v, std::span<double> dv) {
      mf.rhs_order_parameter(v, dv);
    };
    IntegrateOptions opts;
    opts.dt = 0.002;
    double worst = 0.0;
    for (int seg = 1; seg <= 10; ++seg) {
      integrate(autonomous(mf), y, seg - 1.0, seg, opts);
      integrate(fb, z, seg - 1.0, seg, opts);
      const auto back = mf.from_order_parameter(z);
      for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(back[i] - y[i]));
    }
    CAPTURE(weighted);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("gap system: phi stays positive") {
  const auto grid = DegreeDistribution::uniform_width(100, 40).discretize(20);
  const GapMeanField mf(grid, {.eta0 = -0.05, .delta = 0.01, .g = 0.4});
  auto y = mf.initial_state();
  double min_phi = 1.0;
  integrate(autonomous(mf), y, 0.0, 50.0, {}, [&](double, std::span<const double> v) {
    min_phi = std::min(min_phi, *std::min_element(v.begin(), v.begin() + 20));
    return true;
  });
  CHECK(min_phi > 0.0);
}

TEST_CASE("integrate: trivial and linear test problems") {
  const Rhs zero = [](double, std::span<const double>, std::span<double> dy) {
    std::fill(dy.begin(), dy.end(), 0.0);
  };
  std::vector<double> c{1.5, -2.0};
  integrate(zero, c, 0.0, 3.0);
  CHECK(c == std::vector<double>{1.5, -2.0});

  const Rhs decay = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -y[0];
  };
  for (bool adaptive : {false, true}) {
    std::vector<double> y{2.0};
    IntegrateOptions opts;
    opts.adaptive = adaptive;
    integrate(decay, y, 0.0, 1.0, opts);
    CHECK(std::abs(y[0] - 2.0 * std::exp(-1.0)) < 1e-8);
  }

  const auto traj = integrate_sampled(decay, {1.0}, 0.0, 1.0, 0.25);
  REQUIRE(traj.t.size() == 5);
  CHECK(traj.t.back() == 1.0);
  CHECK(traj.y[2][0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));

  const Rhs blowup = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[0] * y[0];
  };
  std::vector<double> b{1.0};
  CHECK_THROWS_AS(integrate(blowup, b, 0.0, 2.0), NumericalError);
}
