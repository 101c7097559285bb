#include "thetanet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "thetanet/error.hpp"

namespace thetanet {

DegreeGrid uniform_grid(double mean, double sigma, std::size_t count) {
  if (count == 0) throw ConfigError("grid needs at least one point");
  if (!(sigma >= 0.0) || sigma > mean) throw ConfigError("uniform half-width out of range");
  DegreeGrid g;
  g.points.resize(count);
  g.weights.assign(count, 1.0 / static_cast<double>(count));
  const double h = 2.0 * sigma / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i)
    g.points[i] = mean + (static_cast<double>(i) + 0.5) * h - sigma;
  return g;
}

DegreeGrid SynapticSetup::grid() const {
  switch (kind) {
    case DegreeKind::uniform_width: return uniform_grid(mean, sigma, grid_points);
    case DegreeKind::shifted_beta:
      return DegreeDistribution::shifted_beta(alpha, lo, hi).discretize(grid_points);
    case DegreeKind::degenerate: return uniform_grid(mean, 0.0, 1);
  }
  return {};
}

SynapticMeanField SynapticSetup::model() const { return {grid(), params}; }

void SynapticSetup::set(std::string_view name, double v) {
  if (name == "eta0") params.eta0 = v;
  else if (name == "delta") params.delta = v;
  else if (name == "K") params.K = v;
  else if (name == "tau") params.tau = v;
  else if (name == "sigma") sigma = v;
  else if (name == "alpha") alpha = v;
  else throw ConfigError("no synaptic parameter '" + std::string(name) + "'");
}

double SynapticSetup::get(std::string_view name) const {
  if (name == "eta0") return params.eta0;
  if (name == "delta") return params.delta;
  if (name == "K") return params.K;
  if (name == "tau") return params.tau;
  if (name == "sigma") return sigma;
  if (name == "alpha") return alpha;
  throw ConfigError("no synaptic parameter '" + std::string(name) + "'");
}

DegreeGrid GapSetup::grid() const { return uniform_grid(mean, sigma, grid_points); }

GapMeanField GapSetup::model() const { return {grid(), params}; }

void GapSetup::set(std::string_view name, double v) {
  if (name == "eta0") params.eta0 = v;
  else if (name == "delta") params.delta = v;
  else if (name == "g") params.g = v;
  else if (name == "sigma") sigma = v;
  else throw ConfigError("no gap parameter '" + std::string(name) + "'");
}

double GapSetup::get(std::string_view name) const {
  if (name == "eta0") return params.eta0;
  if (name == "delta") return params.delta;
  if (name == "g") return params.g;
  if (name == "sigma") return sigma;
  throw ConfigError("no gap parameter '" + std::string(name) + "'");
}

namespace {

template <class Setup>
ParamFamily family_of(const Setup& base, std::string_view param) {
  base.get(param);  // validates the name
  return [base, name = std::string(param)](double p) -> StateFn {
    Setup s = base;
    s.set(name, p);
    using Model = decltype(s.model());
    std::shared_ptr<const Model> mf;
    try {
      mf = std::make_shared<const Model>(s.model());
    } catch (const ConfigError& e) {
      // a continuation step left the model's domain; treat it as a failed step
      return [msg = std::string(e.what())](std::span<const double>, std::span<double>) {
        throw NumericalError(msg);
      };
    }
    return [mf](std::span<const double> x, std::span<double> f) { mf->rhs(x, f); };
  };
}

template <class Setup>
TwoParamFamily family_of(const Setup& base, std::string_view q_param, std::string_view p_param) {
  base.get(q_param);
  base.get(p_param);
  return [base, q = std::string(q_param), p = std::string(p_param)](double qv) {
    Setup s = base;
    s.set(q, qv);
    return family_of(s, p);
  };
}

template <class Model>
std::vector<double> settle(const Model& mf, std::vector<double> y, double t_settle) {
  integrate([&](double, std::span<const double> v, std::span<double> dv) { mf.rhs(v, dv); }, y,
            0.0, t_settle);
  const StateFn f = [&](std::span<const double> v, std::span<double> dv) { mf.rhs(v, dv); };
  return find_fixed_point(f, std::move(y));
}

template <class Setup>
Branch follow(const Setup& setup, std::string_view param, double p_end,
              ContinuationOptions opts) {
  const double p0 = setup.get(param);
  opts.direction = p_end >= p0 ? +1 : -1;
  opts.p_min = std::max(opts.p_min, std::min(p0, p_end));
  opts.p_max = std::min(opts.p_max, std::max(p0, p_end));
  return continue_branch(family_of(setup, param), settle_fixed_point(setup), p0, opts,
                         std::string(param));
}

template <class Setup>
std::vector<std::optional<BifurcationPoint>> scan(const Setup& base, std::string_view q_param,
                                                  const std::vector<double>& q_values,
                                                  std::string_view p_param, double p_start,
                                                  double p_end, BifurcationKind kind,
                                                  ContinuationOptions opts) {
  opts.stop_at = kind == BifurcationKind::hopf ? 1 : 2;
  std::vector<std::optional<BifurcationPoint>> out;
  for (double q : q_values) {
    Setup s = base;
    s.set(q_param, q);
    s.set(p_param, p_start);
    std::optional<BifurcationPoint> found;
    try {
      const Branch br = follow(s, p_param, p_end, opts);
      const auto segs = bracket_bifurcations(br, kind);
      if (!segs.empty()) {
        found = locate_bifurcation(family_of(s, p_param), br, segs.front(), kind, opts);
        found->q = q;
      }
    } catch (const NumericalError&) {
    }
    out.push_back(std::move(found));
  }
  return out;
}

}  // namespace

std::vector<std::optional<BifurcationPoint>> scan_codim1(
    const SynapticSetup& base, std::string_view q_param, const std::vector<double>& q_values,
    std::string_view p_param, double p_start, double p_end, BifurcationKind kind,
    ContinuationOptions opts) {
  return scan(base, q_param, q_values, p_param, p_start, p_end, kind, opts);
}

std::vector<std::optional<BifurcationPoint>> scan_codim1(
    const GapSetup& base, std::string_view q_param, const std::vector<double>& q_values,
    std::string_view p_param, double p_start, double p_end, BifurcationKind kind,
    ContinuationOptions opts) {
  return scan(base, q_param, q_values, p_param, p_start, p_end, kind, opts);
}

ParamFamily synaptic_family(const SynapticSetup& base, std::string_view param) {
  return family_of(base, param);
}
TwoParamFamily synaptic_family(const SynapticSetup& base, std::string_view q_param,
                               std::string_view p_param) {
  return family_of(base, q_param, p_param);
}
ParamFamily gap_family(const GapSetup& base, std::string_view param) {
  return family_of(base, param);
}
TwoParamFamily gap_family(const GapSetup& base, std::string_view q_param,
                          std::string_view p_param) {
  return family_of(base, q_param, p_param);
}

std::vector<double> settle_fixed_point(const SynapticSetup& setup, double t_settle) {
  const auto mf = setup.model();
  return settle(mf, mf.initial_state(), t_settle);
}

std::vector<double> settle_fixed_point(const GapSetup& setup, double t_settle) {
  const auto mf = setup.model();
  return settle(mf, mf.initial_state(), t_settle);
}

Branch follow_branch(const SynapticSetup& setup, std::string_view param, double p_end,
                     ContinuationOptions opts) {
  return follow(setup, param, p_end, opts);
}

Branch follow_branch(const GapSetup& setup, std::string_view param, double p_end,
                     ContinuationOptions opts) {
  return follow(setup, param, p_end, opts);
}

double oscillation_period(std::span<const double> t, std::span<const double> x, double t_from,
                          int min_cycles) {
  const auto begin = static_cast<std::size_t>(
      std::lower_bound(t.begin(), t.end(), t_from) - t.begin());
  if (t.size() - begin < 3) return std::numeric_limits<double>::quiet_NaN();
  const auto [lo, hi] = std::minmax_element(x.begin() + static_cast<std::ptrdiff_t>(begin), x.end());
  const double mid = 0.5 * (*lo + *hi);
  std::vector<double> crossings;
  for (std::size_t i = begin + 1; i < t.size(); ++i) {
    if (x[i - 1] < mid && x[i] >= mid) {
      const double a = (mid - x[i - 1]) / (x[i] - x[i - 1]);
      crossings.push_back(t[i - 1] + a * (t[i] - t[i - 1]));
    }
  }
  if (static_cast<int>(crossings.size()) < min_cycles + 1)
    return std::numeric_limits<double>::quiet_NaN();
  return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

double gap_period(const GapSetup& setup, double t_transient, double t_observe,
                  const IntegrateOptions& opts) {
  const auto mf = setup.model();
  auto y = mf.initial_state();
  const Rhs f = [&](double, std::span<const double> v, std::span<double> dv) { mf.rhs(v, dv); };
  integrate(f, y, 0.0, t_transient, opts);
  std::vector<double> t, r;
  integrate(f, y, t_transient, t_transient + t_observe, opts,
            [&](double tt, std::span<const double> v) {
              t.push_back(tt);
              r.push_back(mf.mean_rate(v));
              return true;
            });
  return oscillation_period(t, r, t_transient);
}

}  // namespace thetanet
