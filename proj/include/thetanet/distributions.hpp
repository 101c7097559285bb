#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "thetanet/random.hpp"

namespace thetanet {

enum class DegreeKind { uniform_width, shifted_beta, degenerate };

std::string_view to_string(DegreeKind kind);
DegreeKind degree_kind_from_string(std::string_view name);

// Midpoint-rule discretization of a degree law. Degrees are continuous reals
// here; the mean-field layer consumes them directly.
struct DegreeGrid {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  double mean() const;
};

// Law of in-, out- or undirected degree. Immutable once built; the factory
// functions validate their parameters and throw ConfigError.
class DegreeDistribution {
 public:
  static DegreeDistribution uniform_width(double mean, double half_width);
  // Beta(alpha, alpha) on [lo, hi]; the mean is the midpoint.
  static DegreeDistribution shifted_beta(double alpha, double lo = 50.0, double hi = 150.0);
  static DegreeDistribution degenerate(double mean);

  DegreeKind kind() const { return kind_; }
  double mean() const { return mean_; }
  double half_width() const { return half_width_; }
  double alpha() const { return alpha_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

  // Probability density in k. The degenerate law has no density; it reports
  // its unit point mass at `mean` and zero elsewhere.
  double density(double k) const;

  std::vector<double> sample(std::size_t n, Rng& rng) const;
  // Rounded to the nearest integer; non-positive draws are redrawn.
  std::vector<int> sample_integer(std::size_t n, Rng& rng) const;

  DegreeGrid discretize(std::size_t count = 100) const;

  bool operator==(const DegreeDistribution&) const = default;

 private:
  DegreeDistribution() = default;

  double draw(Rng& rng) const;

  DegreeKind kind_ = DegreeKind::degenerate;
  double mean_ = 0.0;
  double half_width_ = 0.0;
  double alpha_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double beta_norm_ = 0.0;  // C in C x^(a-1) (1-x)^(a-1)
};

enum class HeterogeneityKind { lorentzian, gaussian, uniform };

std::string_view to_string(HeterogeneityKind kind);
HeterogeneityKind heterogeneity_kind_from_string(std::string_view name);

// Law of the excitability eta (theta neurons) or the current offset I_i
// (Morris-Lecar). `scale` is the HWHM for the Lorentzian, the standard
// deviation for the Gaussian and the half-width for the uniform law.
class HeterogeneityLaw {
 public:
  HeterogeneityLaw(HeterogeneityKind kind, double center, double scale);

  static HeterogeneityLaw lorentzian(double center, double hwhm) {
    return {HeterogeneityKind::lorentzian, center, hwhm};
  }
  static HeterogeneityLaw gaussian(double center, double sd) {
    return {HeterogeneityKind::gaussian, center, sd};
  }
  static HeterogeneityLaw uniform(double center, double half_width) {
    return {HeterogeneityKind::uniform, center, half_width};
  }

  HeterogeneityKind kind() const { return kind_; }
  double center() const { return center_; }
  double scale() const { return scale_; }

  double density(double x) const;
  double cdf(double x) const;
  std::vector<double> sample(std::size_t n, Rng& rng) const;

  bool operator==(const HeterogeneityLaw&) const = default;

 private:
  HeterogeneityKind kind_;
  double center_;
  double scale_;
};

// Adaptive Simpson quadrature, used for the beta normalization.
double integrate_adaptive_simpson(double (*f)(double, double), double param, double a, double b,
                                  double tol);

}  // namespace thetanet
