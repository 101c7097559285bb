#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "thetanet/distributions.hpp"
#include "thetanet/error.hpp"

using namespace thetanet;
using std::numbers::pi;

namespace {

// Independent normalization for Beta(a, a) on [0, 1]: composite Gauss-Legendre
// (5 nodes per panel) on a fine uniform partition.
double beta_integral_oracle(double alpha) {
  const double nodes[] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                          0.9061798459386640};
  const double weights[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                            0.2369268850561891, 0.2369268850561891};
  const int panels = 4000;
  const double h = 1.0 / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int q = 0; q < 5; ++q) {
      const double x = mid + 0.5 * h * nodes[q];
      total += 0.5 * h * weights[q] * std::pow(x * (1 - x), alpha - 1);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("density: Lorentzian peak and uniform plateau") {
  const auto lor = HeterogeneityLaw::lorentzian(0.0, 0.05);
  CHECK(lor.density(0.0) == doctest::Approx(1.0 / (0.05 * pi)).epsilon(1e-14));
  CHECK(lor.density(0.0) == doctest::Approx(6.3662).epsilon(1e-5));

  const auto uni = DegreeDistribution::uniform_width(100, 50);
  CHECK(uni.density(100) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(uni.density(49.9) == 0.0);
  CHECK(uni.density(150.1) == 0.0);
}

TEST_CASE("density: shifted beta matches quadrature normalization") {
  const auto beta = DegreeDistribution::shifted_beta(3.0);
  const double C = 1.0 / beta_integral_oracle(3.0);
  const double expected = C * std::pow(0.5 * 0.5, 2.0) / 100.0;
  CHECK(beta.density(100.0) == doctest::Approx(expected).epsilon(1e-12));
  // Closed form C = 1/B(3,3) = 30 as a second check.
  CHECK(beta.density(100.0) == doctest::Approx(30.0 / 16.0 / 100.0).epsilon(1e-12));
  CHECK(beta.density(40.0) == 0.0);
  CHECK(beta.density(151.0) == 0.0);
}

TEST_CASE("construction rejects invalid parameters") {
  CHECK_THROWS_AS(DegreeDistribution::uniform_width(100, -1), ConfigError);
  CHECK_THROWS_AS(DegreeDistribution::shifted_beta(1.0), ConfigError);
  CHECK_THROWS_AS(DegreeDistribution::degenerate(0.0), ConfigError);
  CHECK_THROWS_AS(HeterogeneityLaw::lorentzian(0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(HeterogeneityLaw::gaussian(0.0, -1.0), ConfigError);
}

TEST_CASE("sample: degenerate, support bounds, determinism") {
  Rng rng(1);
  const auto d = DegreeDistribution::degenerate(100).sample(5, rng);
  CHECK(d == std::vector<double>(5, 100.0));

  const auto narrow = DegreeDistribution::uniform_width(100, 5);
  const auto xs = narrow.sample(10'000, rng);
  CHECK(*std::min_element(xs.begin(), xs.end()) >= 95.0);
  CHECK(*std::max_element(xs.begin(), xs.end()) <= 105.0);

  Rng a(99), b(99);
  CHECK(narrow.sample_integer(100, a) == narrow.sample_integer(100, b));
}

TEST_CASE("sample: Lorentzian median and Kolmogorov distance") {
  const auto lor = HeterogeneityLaw::lorentzian(0.0, 0.05);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    Rng rng(seed);
    auto xs = lor.sample(100'000, rng);
    std::sort(xs.begin(), xs.end());
    const double median = 0.5 * (xs[49'999] + xs[50'000]);
    CHECK(std::abs(median) < 0.005);

    double ks = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double F = lor.cdf(xs[i]);
      ks = std::max({ks, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
    }
    CHECK(ks < 0.02);
  }
}

TEST_CASE("sample: Gaussian and uniform heterogeneity") {
  Rng rng(5);
  const auto g = HeterogeneityLaw::gaussian(1.0, 0.5).sample(50'000, rng);
  const double mean = std::accumulate(g.begin(), g.end(), 0.0) / g.size();
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
  const auto u = HeterogeneityLaw::uniform(0.0, 0.125).sample(10'000, rng);
  CHECK(*std::max_element(u.begin(), u.end()) <= 0.125);
  CHECK(*std::min_element(u.begin(), u.end()) >= -0.125);
}

TEST_CASE("discretize: uniform grid uses equal weights on the midpoint rule") {
  const auto grid = DegreeDistribution::uniform_width(100, 5).discretize(100);
  REQUIRE(grid.size() == 100);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid.weights[i] == 0.01);
    CHECK(grid.points[i] > 95.0);
    CHECK(grid.points[i] < 105.0);
    if (i > 0) CHECK(grid.points[i] > grid.points[i - 1]);
  }
  CHECK(grid.points.front() == doctest::Approx(95.05).epsilon(1e-14));
  CHECK(grid.mean() == doctest::Approx(100.0).epsilon(1e-14));
  const double total = std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0);
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("discretize: degenerate law is a single point") {
  const auto grid = DegreeDistribution::degenerate(100).discretize();
  CHECK(grid.points == std::vector<double>{100.0});
  CHECK(grid.weights == std::vector<double>{1.0});
  // sigma = 0 on the uniform family collapses to the same law.
  CHECK(DegreeDistribution::uniform_width(100, 0).kind() == DegreeKind::degenerate);
}

TEST_CASE("discretize: beta(20, 20) weights are unimodal and symmetric") {
  for (double alpha : {1.5, 3.0, 20.0}) {
    const auto grid = DegreeDistribution::shifted_beta(alpha).discretize(100);
    const double total = std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(std::abs(grid.mean() - 100.0) < 1e-9);
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(std::abs(grid.weights[i] - grid.weights[99 - i]) < 1e-10);
      if (i > 0) CHECK(grid.weights[i] > grid.weights[i - 1]);
    }
  }
}
