#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace thetanet {

// f(x) at a fixed parameter value.
using StateFn = std::function<void(std::span<const double> x, std::span<double> f)>;
// One-parameter family p -> f(., p). Jacobians evaluate many states at the same
// p, so binding p once lets models precompute p-dependent data.
using ParamFamily = std::function<StateFn(double p)>;
// Two-parameter family q -> (p -> f(., p, q)).
using TwoParamFamily = std::function<ParamFamily(double q)>;

struct NewtonOptions {
  double tol = 1e-10;        // on ||f||_inf
  int max_iter = 50;
  double fd_step = 1e-6;     // relative central-difference step
  int max_halvings = 12;
};

// Central differences with step fd_step * max(1, |x_i|).
Eigen::MatrixXd fd_jacobian(const StateFn& f, std::span<const double> x, double fd_step = 1e-6);

// Damped Newton. Throws NumericalError listing the residual history when it
// does not reach tol.
std::vector<double> find_fixed_point(const StateFn& f, std::vector<double> x0,
                                     const NewtonOptions& opts = {});

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;  // sorted by decreasing real part
  double hopf_test;   // max Re over eigenvalues with |Im| > 1e-4; -inf if none
  int det_sign;       // sign of det J (0 if exactly singular)
  bool stable;        // all real parts negative
};

inline constexpr double kComplexThreshold = 1e-4;

Spectrum analyse_spectrum(const Eigen::MatrixXd& J);

struct BranchSample {
  double p;
  std::vector<double> x;
  std::vector<double> tangent;  // unit tangent in (x, p), length n + 1
  Spectrum spectrum;
};

struct Branch {
  std::string parameter;
  std::vector<BranchSample> samples;
  std::vector<double> steps;  // arclength between consecutive samples
  std::string stop_reason;
};

struct ContinuationOptions {
  double ds = 0.1;
  double ds_min = 1e-4;
  double ds_max = 2.0;
  double p_min = -1e300;
  double p_max = 1e300;
  int direction = +1;  // initial sign of dp/ds
  std::size_t max_samples = 5000;
  int corrector_iter = 10;
  NewtonOptions newton;
  // Stop after the first segment with a sign change of this kind (0 = never,
  // 1 = hopf, 2 = fold).
  int stop_at = 0;
};

// Pseudo-arclength continuation from a fixed point of family(p0). The seed is
// Newton-corrected first. The branch follows folds; it stops at the parameter
// bounds, after max_samples, or when the step underflows (reason recorded).
Branch continue_branch(const ParamFamily& family, std::vector<double> x0, double p0,
                       const ContinuationOptions& opts = {}, std::string parameter = "p");

enum class BifurcationKind { hopf, fold };

const char* to_string(BifurcationKind kind);

struct BifurcationPoint {
  BifurcationKind kind;
  double p;
  double q = 0.0;  // second parameter, for two-parameter curves
  std::vector<double> x;
  std::complex<double> critical;  // eigenvalue closest to the imaginary axis
  Spectrum spectrum;
};

// Segments i (samples i, i+1) on which the kind's test function changes sign.
std::vector<std::size_t> bracket_bifurcations(const Branch& branch, BifurcationKind kind);

// Refines a sign change on segment i by secant (Hopf, Illinois variant) or
// bisection (fold, sign of det J) in arclength. Throws NumericalError when the
// segment has no sign change.
BifurcationPoint locate_bifurcation(const ParamFamily& family, const Branch& branch,
                                    std::size_t segment, BifurcationKind kind,
                                    const ContinuationOptions& opts = {});

std::vector<BifurcationPoint> locate_all(const ParamFamily& family, const Branch& branch,
                                         BifurcationKind kind,
                                         const ContinuationOptions& opts = {});

struct CurveOptions {
  ContinuationOptions cont;
  // Samples at least this far (in p) from the located point serve as the next
  // starting state; keeps the start on the existing side of a fold.
  double anchor_gap = 0.05;
  // Search window beyond the previous location, in p.
  double window = 1.0;
};

struct Curve {
  BifurcationKind kind;
  std::vector<BifurcationPoint> points;
  std::string stop_reason;
};

// Detect-and-step: for each q in q_values, continue from the anchor toward the
// previous location, bracket the nearest sign change and refine it. The first
// search starts at (anchor_x, anchor_p) and heads in cont.direction.
Curve trace_codim1_curve(const TwoParamFamily& family, BifurcationKind kind,
                         const std::vector<double>& q_values, std::vector<double> anchor_x,
                         double anchor_p, const CurveOptions& opts = {});

}  // namespace thetanet
