#include "thetanet/distributions.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "thetanet/error.hpp"

namespace thetanet {

namespace {

double beta_kernel(double x, double alpha) {
  return std::pow(x, alpha - 1.0) * std::pow(1.0 - x, alpha - 1.0);
}

double simpson_step(double (*f)(double, double), double param, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm, param);
  const double frm = f(rm, param);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, param, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, param, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive_simpson(double (*f)(double, double), double param, double a, double b,
                                  double tol) {
  const double fa = f(a, param);
  const double fb = f(b, param);
  const double fm = f(0.5 * (a + b), param);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, param, a, b, fa, fm, fb, whole, tol, 48);
}

double DegreeGrid::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) m += points[i] * weights[i];
  return m;
}

std::string_view to_string(DegreeKind kind) {
  switch (kind) {
    case DegreeKind::uniform_width: return "uniform-width";
    case DegreeKind::shifted_beta: return "shifted-beta";
    case DegreeKind::degenerate: return "degenerate";
  }
  return "?";
}

DegreeKind degree_kind_from_string(std::string_view name) {
  if (name == "uniform-width" || name == "uniform") return DegreeKind::uniform_width;
  if (name == "shifted-beta" || name == "beta") return DegreeKind::shifted_beta;
  if (name == "degenerate") return DegreeKind::degenerate;
  throw ConfigError("unknown degree distribution kind '" + std::string(name) + "'");
}

DegreeDistribution DegreeDistribution::uniform_width(double mean, double half_width) {
  if (!(mean > 0.0)) throw ConfigError("degree distribution mean must be positive");
  if (!(half_width >= 0.0)) throw ConfigError("uniform half-width sigma must be nonnegative");
  if (half_width > mean) throw ConfigError("uniform half-width sigma exceeds the mean");
  if (half_width == 0.0) return degenerate(mean);
  DegreeDistribution d;
  d.kind_ = DegreeKind::uniform_width;
  d.mean_ = mean;
  d.half_width_ = half_width;
  d.lo_ = mean - half_width;
  d.hi_ = mean + half_width;
  return d;
}

DegreeDistribution DegreeDistribution::shifted_beta(double alpha, double lo, double hi) {
  if (!(alpha > 1.0)) throw ConfigError("beta shape alpha must exceed 1");
  if (!(lo >= 0.0 && hi > lo)) throw ConfigError("beta support must satisfy 0 <= lo < hi");
  DegreeDistribution d;
  d.kind_ = DegreeKind::shifted_beta;
  d.alpha_ = alpha;
  d.lo_ = lo;
  d.hi_ = hi;
  d.mean_ = 0.5 * (lo + hi);
  d.half_width_ = 0.5 * (hi - lo);
  d.beta_norm_ = 1.0 / integrate_adaptive_simpson(beta_kernel, alpha, 0.0, 1.0, 1e-14);
  return d;
}

DegreeDistribution DegreeDistribution::degenerate(double mean) {
  if (!(mean > 0.0)) throw ConfigError("degree distribution mean must be positive");
  DegreeDistribution d;
  d.kind_ = DegreeKind::degenerate;
  d.mean_ = mean;
  d.lo_ = mean;
  d.hi_ = mean;
  return d;
}

double DegreeDistribution::density(double k) const {
  switch (kind_) {
    case DegreeKind::degenerate: return k == mean_ ? 1.0 : 0.0;
    case DegreeKind::uniform_width:
      return (k >= lo_ && k <= hi_) ? 1.0 / (hi_ - lo_) : 0.0;
    case DegreeKind::shifted_beta: {
      if (k < lo_ || k > hi_) return 0.0;
      const double x = (k - lo_) / (hi_ - lo_);
      return beta_norm_ * beta_kernel(x, alpha_) / (hi_ - lo_);
    }
  }
  return 0.0;
}

double DegreeDistribution::draw(Rng& rng) const {
  switch (kind_) {
    case DegreeKind::degenerate: return mean_;
    case DegreeKind::uniform_width: return lo_ + (hi_ - lo_) * uniform01(rng);
    case DegreeKind::shifted_beta: {
      std::gamma_distribution<double> gamma(alpha_, 1.0);
      const double a = gamma(rng);
      const double b = gamma(rng);
      return lo_ + (hi_ - lo_) * a / (a + b);
    }
  }
  return mean_;
}

std::vector<double> DegreeDistribution::sample(std::size_t n, Rng& rng) const {
  std::vector<double> out(n);
  for (auto& v : out) v = draw(rng);
  return out;
}

std::vector<int> DegreeDistribution::sample_integer(std::size_t n, Rng& rng) const {
  std::vector<int> out(n);
  for (auto& v : out) {
    long r = 0;
    for (int attempt = 0; attempt < 1000 && r <= 0; ++attempt) r = std::lround(draw(rng));
    if (r <= 0) throw ConfigError("degree law produces no positive integer degrees");
    v = static_cast<int>(r);
  }
  return out;
}

DegreeGrid DegreeDistribution::discretize(std::size_t count) const {
  if (count == 0) throw ConfigError("grid count must be positive");
  DegreeGrid grid;
  if (kind_ == DegreeKind::degenerate) {
    grid.points = {mean_};
    grid.weights = {1.0};
    return grid;
  }
  const double h = (hi_ - lo_) / static_cast<double>(count);
  grid.points.resize(count);
  grid.weights.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Anchored at the centre so mirrored points are exact negatives about the mean.
    const double offset = (static_cast<double>(i) + 0.5) * h - 0.5 * (hi_ - lo_);
    grid.points[i] = mean_ + offset;
  }
  if (kind_ == DegreeKind::uniform_width) {
    std::fill(grid.weights.begin(), grid.weights.end(), 1.0 / static_cast<double>(count));
    return grid;
  }
  for (std::size_t i = 0; i < count; ++i) grid.weights[i] = density(grid.points[i]);
  // Symmetric pairwise summation keeps beta(a, a) weights exactly mirrored.
  double total = 0.0;
  for (std::size_t i = 0; i < count / 2; ++i)
    total += grid.weights[i] + grid.weights[count - 1 - i];
  if (count % 2 == 1) total += grid.weights[count / 2];
  for (auto& w : grid.weights) w /= total;
  return grid;
}

std::string_view to_string(HeterogeneityKind kind) {
  switch (kind) {
    case HeterogeneityKind::lorentzian: return "lorentzian";
    case HeterogeneityKind::gaussian: return "gaussian";
    case HeterogeneityKind::uniform: return "uniform";
  }
  return "?";
}

HeterogeneityKind heterogeneity_kind_from_string(std::string_view name) {
  if (name == "lorentzian") return HeterogeneityKind::lorentzian;
  if (name == "gaussian" || name == "normal") return HeterogeneityKind::gaussian;
  if (name == "uniform") return HeterogeneityKind::uniform;
  throw ConfigError("unknown heterogeneity kind '" + std::string(name) + "'");
}

HeterogeneityLaw::HeterogeneityLaw(HeterogeneityKind kind, double center, double scale)
    : kind_(kind), center_(center), scale_(scale) {
  if (!std::isfinite(center)) throw ConfigError("heterogeneity center must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ConfigError("heterogeneity scale must be positive");
}

double HeterogeneityLaw::density(double x) const {
  using std::numbers::pi;
  const double z = x - center_;
  switch (kind_) {
    case HeterogeneityKind::lorentzian: return (scale_ / pi) / (z * z + scale_ * scale_);
    case HeterogeneityKind::gaussian:
      return std::exp(-0.5 * z * z / (scale_ * scale_)) / (scale_ * std::sqrt(2.0 * pi));
    case HeterogeneityKind::uniform: return std::abs(z) <= scale_ ? 0.5 / scale_ : 0.0;
  }
  return 0.0;
}

double HeterogeneityLaw::cdf(double x) const {
  using std::numbers::pi;
  const double z = x - center_;
  switch (kind_) {
    case HeterogeneityKind::lorentzian: return 0.5 + std::atan(z / scale_) / pi;
    case HeterogeneityKind::gaussian: return 0.5 * std::erfc(-z / (scale_ * std::sqrt(2.0)));
    case HeterogeneityKind::uniform:
      return std::clamp((z + scale_) / (2.0 * scale_), 0.0, 1.0);
  }
  return 0.0;
}

std::vector<double> HeterogeneityLaw::sample(std::size_t n, Rng& rng) const {
  using std::numbers::pi;
  std::vector<double> out(n);
  switch (kind_) {
    case HeterogeneityKind::lorentzian:
      for (auto& v : out) v = center_ + scale_ * std::tan(pi * (uniform_open01(rng) - 0.5));
      break;
    case HeterogeneityKind::gaussian: {
      std::normal_distribution<double> normal(center_, scale_);
      for (auto& v : out) v = normal(rng);
      break;
    }
    case HeterogeneityKind::uniform:
      for (auto& v : out) v = center_ + scale_ * (2.0 * uniform01(rng) - 1.0);
      break;
  }
  return out;
}

}  // namespace thetanet
