#include "thetanet/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "thetanet/error.hpp"

namespace thetanet {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
}

std::vector<double> eval(const StateFn& f, std::span<const double> x) {
  std::vector<double> out(x.size());
  f(x, out);
  return out;
}

// Residual of a state that threw from the model counts as infinite.
std::vector<double> eval_safe(const StateFn& f, std::span<const double> x) {
  try {
    return eval(f, x);
  } catch (const NumericalError&) {
    return std::vector<double>(x.size(), std::numeric_limits<double>::infinity());
  }
}

double param_step(double p, double rel) { return rel * std::max(1.0, std::abs(p)); }

VectorXd fd_param_derivative(const ParamFamily& family, std::span<const double> x, double p,
                             double rel) {
  const double h = param_step(p, rel);
  const auto fp = eval(family(p + h), x);
  const auto fm = eval(family(p - h), x);
  VectorXd d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = (fp[i] - fm[i]) / (2.0 * h);
  return d;
}

struct Point {
  std::vector<double> x;
  double p;
};

VectorXd pack(const Point& u) {
  VectorXd v(u.x.size() + 1);
  for (std::size_t i = 0; i < u.x.size(); ++i) v[i] = u.x[i];
  v[u.x.size()] = u.p;
  return v;
}

Point unpack(const VectorXd& v) {
  Point u;
  u.x.assign(v.data(), v.data() + v.size() - 1);
  u.p = v[v.size() - 1];
  return u;
}

MatrixXd bordered(const MatrixXd& J, const VectorXd& fp, const VectorXd& t) {
  const auto n = J.rows();
  MatrixXd A(n + 1, n + 1);
  A.topLeftCorner(n, n) = J;
  A.topRightCorner(n, 1) = fp;
  A.bottomRows(1) = t.transpose();
  return A;
}

// Newton on [f(x, p); t . (u - base) - s] = 0 starting from base + s t.
// Returns the corrected point and the iteration count, or nothing.
std::optional<std::pair<Point, int>> correct(const ParamFamily& family, const VectorXd& base,
                                             const VectorXd& t, double s,
                                             const ContinuationOptions& opts) {
  VectorXd u = base + s * t;
  const auto n = u.size() - 1;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= opts.corrector_iter; ++it) {
    const Point pt = unpack(u);
    StateFn f;
    std::vector<double> r;
    try {
      f = family(pt.p);
      r = eval(f, pt.x);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
    const double res = inf_norm(r);
    const double constraint = t.dot(u - base) - s;
    if (!std::isfinite(res)) return std::nullopt;
    if (res < opts.newton.tol && std::abs(constraint) < 1e-12 * std::max(1.0, std::abs(s)))
      return std::make_pair(pt, it);
    if (it > 2 && res > prev) return std::nullopt;
    prev = res;
    if (it == opts.corrector_iter) break;
    MatrixXd J;
    VectorXd fp;
    try {
      J = fd_jacobian(f, pt.x, opts.newton.fd_step);
      fp = fd_param_derivative(family, pt.x, pt.p, opts.newton.fd_step);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
    VectorXd rhs(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) rhs[i] = -r[i];
    rhs[n] = -constraint;
    const VectorXd du = bordered(J, fp, t).partialPivLu().solve(rhs);
    if (!du.allFinite()) return std::nullopt;
    u += du;
  }
  return std::nullopt;
}

struct Local {
  MatrixXd J;
  VectorXd fp;
};

Local linearize(const ParamFamily& family, const Point& u, double rel) {
  const StateFn f = family(u.p);
  return {fd_jacobian(f, u.x, rel), fd_param_derivative(family, u.x, u.p, rel)};
}

VectorXd tangent_from(const Local& L, const VectorXd& orient) {
  const auto n = L.J.rows();
  VectorXd rhs = VectorXd::Zero(n + 1);
  rhs[n] = 1.0;
  VectorXd t = bordered(L.J, L.fp, orient).partialPivLu().solve(rhs);
  if (!t.allFinite() || t.norm() == 0.0) throw NumericalError("degenerate branch tangent");
  t.normalize();
  if (t.dot(orient) < 0.0) t = -t;
  return t;
}

BranchSample make_sample(const Point& u, const Local& L, const VectorXd& t) {
  BranchSample s;
  s.p = u.p;
  s.x = u.x;
  s.tangent.assign(t.data(), t.data() + t.size());
  s.spectrum = analyse_spectrum(L.J);
  return s;
}

bool has_sign_change(const BranchSample& a, const BranchSample& b, BifurcationKind kind) {
  if (kind == BifurcationKind::fold)
    return a.spectrum.det_sign != 0 && b.spectrum.det_sign != 0 &&
           a.spectrum.det_sign != b.spectrum.det_sign;
  const double ha = a.spectrum.hopf_test, hb = b.spectrum.hopf_test;
  return std::isfinite(ha) && std::isfinite(hb) && ((ha < 0.0) != (hb < 0.0));
}

std::complex<double> critical_eigenvalue(const Spectrum& sp, BifurcationKind kind) {
  std::complex<double> best{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& ev : sp.eigenvalues) {
    const bool complex_pair = std::abs(ev.imag()) > kComplexThreshold;
    if (kind == BifurcationKind::hopf && !complex_pair) continue;
    if (kind == BifurcationKind::hopf && ev.imag() < 0.0) continue;
    if (kind == BifurcationKind::fold && complex_pair) continue;
    if (std::abs(ev.real()) < std::abs(best.real())) best = ev;
  }
  return best;
}

}  // namespace

Eigen::MatrixXd fd_jacobian(const StateFn& f, std::span<const double> x, double fd_step) {
  const std::size_t n = x.size();
  MatrixXd J(n, n);
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> fplus(n), fminus(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = fd_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    f(xp, fplus);
    xp[j] = x[j] - h;
    f(xp, fminus);
    xp[j] = x[j];
    for (std::size_t i = 0; i < n; ++i) J(i, j) = (fplus[i] - fminus[i]) / (2.0 * h);
  }
  return J;
}

std::vector<double> find_fixed_point(const StateFn& f, std::vector<double> x,
                                     const NewtonOptions& opts) {
  std::vector<double> history;
  auto r = eval(f, x);
  double res = inf_norm(r);
  history.push_back(res);
  for (int it = 0; it < opts.max_iter && !(res < opts.tol); ++it) {
    const MatrixXd J = fd_jacobian(f, x, opts.fd_step);
    const VectorXd rhs = -Eigen::Map<const VectorXd>(r.data(), r.size());
    const VectorXd dx = J.partialPivLu().solve(rhs);
    if (!dx.allFinite()) break;
    double alpha = 1.0;
    std::vector<double> trial(x.size()), rt;
    double rtn = std::numeric_limits<double>::infinity();
    for (int h = 0; h <= opts.max_halvings; ++h, alpha *= 0.5) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * dx[i];
      rt = eval_safe(f, trial);
      rtn = inf_norm(rt);
      if (rtn < (1.0 - 1e-4 * alpha) * res) break;
    }
    if (!std::isfinite(rtn)) break;
    x = trial;
    r = std::move(rt);
    res = rtn;
    history.push_back(res);
  }
  if (!(res < opts.tol)) {
    std::ostringstream msg;
    msg << "Newton did not converge; residual history:";
    for (double h : history) msg << ' ' << h;
    throw NumericalError(msg.str());
  }
  return x;
}

Spectrum analyse_spectrum(const Eigen::MatrixXd& J) {
  Spectrum sp;
  Eigen::EigenSolver<MatrixXd> es(J, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  const auto ev = es.eigenvalues();
  sp.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(sp.eigenvalues.begin(), sp.eigenvalues.end(),
            [](auto a, auto b) { return a.real() > b.real(); });
  sp.hopf_test = -std::numeric_limits<double>::infinity();
  for (const auto& e : sp.eigenvalues)
    if (std::abs(e.imag()) > kComplexThreshold) sp.hopf_test = std::max(sp.hopf_test, e.real());
  sp.stable = sp.eigenvalues.empty() || sp.eigenvalues.front().real() < 0.0;

  Eigen::PartialPivLU<MatrixXd> lu(J);
  int sign = static_cast<int>(lu.permutationP().determinant());
  const MatrixXd& m = lu.matrixLU();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) == 0.0) {
      sign = 0;
      break;
    }
    if (m(i, i) < 0.0) sign = -sign;
  }
  sp.det_sign = sign;
  return sp;
}

Branch continue_branch(const ParamFamily& family, std::vector<double> x0, double p0,
                       const ContinuationOptions& opts, std::string parameter) {
  if (!(opts.ds_min > 0.0 && opts.ds_min <= opts.ds && opts.ds <= opts.ds_max))
    throw ConfigError("continuation steps must satisfy 0 < ds_min <= ds <= ds_max");
  if (opts.direction != 1 && opts.direction != -1)
    throw ConfigError("continuation direction must be +1 or -1");
  Branch br;
  br.parameter = std::move(parameter);

  Point u{find_fixed_point(family(p0), std::move(x0), opts.newton), p0};
  const auto n = static_cast<Eigen::Index>(u.x.size());
  VectorXd orient = VectorXd::Zero(n + 1);
  orient[n] = opts.direction;
  Local L = linearize(family, u, opts.newton.fd_step);
  VectorXd t = tangent_from(L, orient);
  br.samples.push_back(make_sample(u, L, t));

  double ds = opts.ds;
  VectorXd secant = t;
  while (br.samples.size() < opts.max_samples) {
    const VectorXd base = pack(u);
    const VectorXd dir = br.samples.size() > 1 ? secant : t;
    auto step = correct(family, base, dir, ds, opts);
    std::optional<VectorXd> t_new;
    Local L_new;
    if (step) {
      try {
        L_new = linearize(family, step->first, opts.newton.fd_step);
        t_new = tangent_from(L_new, dir);
      } catch (const NumericalError&) {
        t_new.reset();
      }
    }
    // Reject steps that turn the tangent sharply; they tend to jump branches.
    if (!step || !t_new || t_new->dot(t) < 0.9) {
      ds *= 0.5;
      if (ds < opts.ds_min) {
        br.stop_reason = "step size underflow";
        return br;
      }
      continue;
    }
    const Point un = step->first;
    if (un.p < opts.p_min || un.p > opts.p_max) {
      br.stop_reason = "parameter bound reached";
      return br;
    }
    const VectorXd diff = pack(un) - base;
    if (diff.norm() > opts.ds_max) {
      // the chord exceeds its projection on a curving branch
      ds *= 0.999 * opts.ds_max / diff.norm();
      continue;
    }
    secant = diff.normalized();
    br.steps.push_back(diff.norm());
    u = un;
    t = *t_new;
    L = std::move(L_new);
    br.samples.push_back(make_sample(u, L, t));

    if (opts.stop_at != 0) {
      const auto kind = opts.stop_at == 1 ? BifurcationKind::hopf : BifurcationKind::fold;
      const auto& s = br.samples;
      if (has_sign_change(s[s.size() - 2], s.back(), kind)) {
        br.stop_reason = std::string(to_string(kind)) + " bracketed";
        return br;
      }
    }
    const int iters = step->second;
    if (iters <= 3)
      ds = std::min(ds * 1.5, opts.ds_max);
    else if (iters >= 6)
      ds = std::max(ds * 0.7, opts.ds_min);
  }
  br.stop_reason = "sample limit reached";
  return br;
}

const char* to_string(BifurcationKind kind) {
  return kind == BifurcationKind::hopf ? "hopf" : "fold";
}

std::vector<std::size_t> bracket_bifurcations(const Branch& branch, BifurcationKind kind) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < branch.samples.size(); ++i)
    if (has_sign_change(branch.samples[i], branch.samples[i + 1], kind)) out.push_back(i);
  return out;
}

BifurcationPoint locate_bifurcation(const ParamFamily& family, const Branch& branch,
                                    std::size_t segment, BifurcationKind kind,
                                    const ContinuationOptions& opts) {
  if (segment + 1 >= branch.samples.size())
    throw ConfigError("bifurcation segment index out of range");
  const auto& a = branch.samples[segment];
  const auto& b = branch.samples[segment + 1];
  if (!has_sign_change(a, b, kind))
    throw NumericalError(std::string("no ") + to_string(kind) + " sign change on segment");

  const VectorXd base = pack({a.x, a.p});
  const VectorXd t = Eigen::Map<const VectorXd>(a.tangent.data(), a.tangent.size());
  const double s_end = t.dot(pack({b.x, b.p}) - base);

  struct Eval {
    double s;
    Point u;
    Spectrum sp;
    double value;
  };
  auto evaluate = [&](double s) -> Eval {
    auto c = correct(family, base, t, s, opts);
    if (!c) throw NumericalError("corrector failed while locating a bifurcation");
    const Local Lc = linearize(family, c->first, opts.newton.fd_step);
    Spectrum sp = analyse_spectrum(Lc.J);
    const double v = kind == BifurcationKind::hopf ? sp.hopf_test : sp.det_sign;
    return {s, c->first, std::move(sp), v};
  };

  Eval lo{0.0, {a.x, a.p}, a.spectrum,
          kind == BifurcationKind::hopf ? a.spectrum.hopf_test : double(a.spectrum.det_sign)};
  Eval hi = evaluate(s_end);
  if ((lo.value < 0.0) == (hi.value < 0.0)) {
    // The projected end landed on the near side; fall back to the stored sample.
    hi = Eval{s_end, {b.x, b.p}, b.spectrum,
              kind == BifurcationKind::hopf ? b.spectrum.hopf_test : double(b.spectrum.det_sign)};
  }

  const double s_tol = 1e-11 * std::max(1.0, std::abs(s_end));
  Eval best = std::abs(lo.value) < std::abs(hi.value) ? lo : hi;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(hi.s - lo.s) < s_tol) break;
    double s;
    if (kind == BifurcationKind::hopf && std::isfinite(lo.value) && std::isfinite(hi.value)) {
      // Illinois false position
      s = (lo.s * hi.value - hi.s * lo.value) / (hi.value - lo.value);
      if (!(s > std::min(lo.s, hi.s) && s < std::max(lo.s, hi.s))) s = 0.5 * (lo.s + hi.s);
    } else {
      s = 0.5 * (lo.s + hi.s);
    }
    Eval m = evaluate(s);
    if (kind == BifurcationKind::hopf && !std::isfinite(m.value)) {
      // complex pair absent at this point; bisect instead
      m.value = lo.value;
    }
    if ((m.value < 0.0) == (lo.value < 0.0)) {
      lo = m;
      if (side == -1 && kind == BifurcationKind::hopf) hi.value *= 0.5;
      side = -1;
    } else {
      hi = m;
      if (side == 1 && kind == BifurcationKind::hopf) lo.value *= 0.5;
      side = 1;
    }
    best = m;
    if (kind == BifurcationKind::hopf && std::abs(m.value) < 1e-13) break;
  }
  if (kind == BifurcationKind::fold) {
    // det J flips across the fold: take the endpoint with the smaller critical eigenvalue.
    const double cl = std::abs(critical_eigenvalue(lo.sp, kind).real());
    const double ch = std::abs(critical_eigenvalue(hi.sp, kind).real());
    best = cl <= ch ? lo : hi;
  }

  BifurcationPoint bp;
  bp.kind = kind;
  bp.p = best.u.p;
  bp.x = best.u.x;
  bp.spectrum = best.sp;
  bp.critical = critical_eigenvalue(best.sp, kind);
  return bp;
}

std::vector<BifurcationPoint> locate_all(const ParamFamily& family, const Branch& branch,
                                         BifurcationKind kind, const ContinuationOptions& opts) {
  std::vector<BifurcationPoint> out;
  for (std::size_t seg : bracket_bifurcations(branch, kind))
    out.push_back(locate_bifurcation(family, branch, seg, kind, opts));
  return out;
}

Curve trace_codim1_curve(const TwoParamFamily& family, BifurcationKind kind,
                         const std::vector<double>& q_values, std::vector<double> anchor_x,
                         double anchor_p, const CurveOptions& opts) {
  Curve curve;
  curve.kind = kind;
  int direction = opts.cont.direction;
  double last_p = std::numeric_limits<double>::quiet_NaN();
  for (double q : q_values) {
    const ParamFamily fam = family(q);
    ContinuationOptions co = opts.cont;
    co.direction = direction;
    co.stop_at = kind == BifurcationKind::hopf ? 1 : 2;
    if (std::isfinite(last_p)) {
      co.p_min = std::max(co.p_min, std::min(anchor_p, last_p) - opts.window);
      co.p_max = std::min(co.p_max, std::max(anchor_p, last_p) + opts.window);
    }
    Branch br;
    try {
      br = continue_branch(fam, anchor_x, anchor_p, co);
    } catch (const NumericalError& e) {
      curve.stop_reason = "start failed at q = " + std::to_string(q) + ": " + e.what();
      return curve;
    }
    const auto segs = bracket_bifurcations(br, kind);
    if (segs.empty()) {
      curve.stop_reason = "bracket lost at q = " + std::to_string(q) + " (" + br.stop_reason + ")";
      return curve;
    }
    BifurcationPoint bp = locate_bifurcation(fam, br, segs.front(), kind, co);
    bp.q = q;
    last_p = bp.p;
    // New anchor: the sample nearest the located point that keeps the gap.
    for (std::size_t i = segs.front() + 1; i-- > 0;) {
      if (std::abs(br.samples[i].p - bp.p) >= opts.anchor_gap || i == 0) {
        anchor_x = br.samples[i].x;
        anchor_p = br.samples[i].p;
        break;
      }
    }
    direction = bp.p >= anchor_p ? +1 : -1;
    curve.points.push_back(std::move(bp));
  }
  curve.stop_reason = "completed";
  return curve;
}

}  // namespace thetanet
