#include "thetanet/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "thetanet/error.hpp"

namespace thetanet {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::size_t step_count(double duration, double dt) {
  if (!(duration >= 0.0)) throw ConfigError("duration must be nonnegative");
  return static_cast<std::size_t>(std::llround(duration / dt));
}

std::size_t stride_for(const RecordOptions& rec, double dt) {
  if (rec.every < 0.0) throw ConfigError("record interval must be nonnegative");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rec.every / dt)));
}

void require_finite(double v, std::size_t step, const char* what) {
  if (!std::isfinite(v))
    throw NumericalError(std::string("non-finite ") + what + " at step " + std::to_string(step));
}

void check_network(const std::shared_ptr<const Network>& net, std::size_t dev_size, bool directed) {
  if (!net) throw ConfigError("network is null");
  if (net->directed() != directed)
    throw ConfigError(directed ? "synaptic coupling needs a directed network"
                               : "gap-junction coupling needs an undirected network");
  if (dev_size != static_cast<std::size_t>(net->size()))
    throw ConfigError("heterogeneity vector does not match the network size");
}

double safe_mean_degree(const Network& net) {
  const double k = net.mean_degree();
  return k > 0.0 ? k : 1.0;
}

// Per-step bookkeeping shared by the simulators.
struct Recorder {
  Recorder(const RecordOptions& rec, double dt, int n)
      : rec(rec), dt(dt), stride(stride_for(rec, dt)), n(n) {
    result.spike_counts.assign(static_cast<std::size_t>(n), 0);
  }
  void spikes(std::span<const std::uint8_t> fired, double t) {
    for (std::size_t i = 0; i < fired.size(); ++i)
      if (fired[i]) {
        ++result.spike_counts[i];
        ++window_spikes;
        if (rec.spikes) result.spikes.push_back({t, static_cast<std::int32_t>(i)});
      }
  }
  bool due(std::size_t step) const { return step % stride == 0; }
  void sample(double t, double primary, double secondary) {
    result.t.push_back(t);
    result.primary.push_back(primary);
    result.secondary.push_back(secondary);
    window_spikes = 0;
  }
  double window_rate() const {
    return static_cast<double>(window_spikes) / (static_cast<double>(stride) * dt * n);
  }

  const RecordOptions& rec;
  double dt;
  std::size_t stride;
  int n;
  std::uint64_t window_spikes = 0;
  SimResult result;
};

}  // namespace

WindowStats window_stats(std::span<const double> t, std::span<const double> values, double t_from,
                         double t_to) {
  WindowStats w;
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_from && t[i] <= t_to) {
      sum += values[i];
      ++w.samples;
    }
  if (w.samples == 0) return w;
  w.mean = sum / static_cast<double>(w.samples);
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_from && t[i] <= t_to) ss += (values[i] - w.mean) * (values[i] - w.mean);
  w.stddev = std::sqrt(ss / static_cast<double>(w.samples));
  return w;
}

WindowStats trailing_stats(const SimResult& r, double window) {
  if (r.t.empty()) return {};
  const double end = r.t.back();
  // small slack so that a window equal to a multiple of the stride keeps its first sample
  return window_stats(r.t, r.primary, end - window - 1e-9 * std::max(1.0, std::abs(end)), end);
}

// ---------------------------------------------------------------- theta, synaptic

ThetaSynapticSim::ThetaSynapticSim(std::shared_ptr<const Network> net, std::vector<double> eta_dev,
                                   double eta0, double K, double tau, double dt,
                                   const kernels::KernelTable& kernels)
    : net_(std::move(net)), eta_dev_(std::move(eta_dev)), eta0_(eta0), K_(K), tau_(tau), dt_(dt),
      k_(&kernels) {
  check_network(net_, eta_dev_.size(), true);
  if (!(tau_ > 0.0)) throw ConfigError("tau must be positive");
  if (!(dt_ > 0.0)) throw ConfigError("dt must be positive");
  mean_degree_ = safe_mean_degree(*net_);
  const auto n = static_cast<std::size_t>(net_->size());
  theta_.assign(n, 0.0);
  u_.assign(n, 0.0);
  input_.resize(n);
  drive_.resize(n);
  fired_.resize(n);
}

SimResult ThetaSynapticSim::advance(double duration, const RecordOptions& rec) {
  const std::size_t steps = step_count(duration, dt_);
  Recorder r(rec, dt_, size());
  const std::size_t n = theta_.size();
  const double decay = 1.0 - dt_ / tau_;
  const double kick = 1.0 / tau_;
  if (t_ == 0.0 || steps == 0) r.sample(t_, mean_of(u_), 0.0);
  for (std::size_t step = 1; step <= steps; ++step) {
    k_->csr_row_sums(net_->in_offsets(), net_->in_neighbors(), u_, input_);
    const double c = K_ / mean_degree_;
    for (std::size_t i = 0; i < n; ++i) drive_[i] = eta0_ + eta_dev_[i] + c * input_[i];
    k_->theta_step(theta_, drive_, {}, dt_, fired_);
    for (std::size_t i = 0; i < n; ++i) u_[i] = u_[i] * decay + (fired_[i] ? kick : 0.0);
    t_ += dt_;
    r.spikes(fired_, t_);
    if (r.due(step) || step == steps) {
      const double s_hat = mean_of(u_);
      require_finite(s_hat + mean_of(theta_), step, "theta/u state");
      r.sample(t_, s_hat, r.window_rate());
    }
  }
  r.result.steps = steps;
  return std::move(r.result);
}

// ---------------------------------------------------------------- theta, gap

ThetaGapSim::ThetaGapSim(std::shared_ptr<const Network> net, std::vector<double> eta_dev,
                         double eta0, double g, double eps_reg, double dt,
                         const kernels::KernelTable& kernels)
    : net_(std::move(net)), eta_dev_(std::move(eta_dev)), eta0_(eta0), g_(g), eps_(eps_reg),
      dt_(dt), k_(&kernels) {
  check_network(net_, eta_dev_.size(), false);
  if (!(eps_ > 0.0)) throw ConfigError("regularization eps must be positive");
  if (!(dt_ > 0.0)) throw ConfigError("dt must be positive");
  mean_degree_ = safe_mean_degree(*net_);
  const auto n = static_cast<std::size_t>(net_->size());
  theta_.assign(n, 0.0);
  q_.resize(n);
  qsum_.resize(n);
  drive_.resize(n);
  fired_.resize(n);
  set_coupling(g);
}

void ThetaGapSim::set_coupling(double g) {
  if (!(g >= 0.0)) throw ConfigError("gap coupling must be nonnegative");
  g_ = g;
  const auto deg = net_->degrees();
  leak_.resize(deg.size());
  for (std::size_t i = 0; i < deg.size(); ++i) leak_[i] = g_ * deg[i] / mean_degree_;
}

SimResult ThetaGapSim::advance(double duration, const RecordOptions& rec) {
  const std::size_t steps = step_count(duration, dt_);
  Recorder r(rec, dt_, size());
  const std::size_t n = theta_.size();
  auto q_mean = [&] {
    k_->theta_q(theta_, eps_, q_);
    return mean_of(q_);
  };
  if (t_ == 0.0 || steps == 0) r.sample(t_, q_mean(), 0.0);
  for (std::size_t step = 1; step <= steps; ++step) {
    k_->theta_q(theta_, eps_, q_);
    k_->csr_row_sums(net_->in_offsets(), net_->in_neighbors(), q_, qsum_);
    const double c = g_ / mean_degree_;
    for (std::size_t i = 0; i < n; ++i) drive_[i] = eta0_ + eta_dev_[i] + c * qsum_[i];
    k_->theta_step(theta_, drive_, leak_, dt_, fired_);
    t_ += dt_;
    r.spikes(fired_, t_);
    if (r.due(step) || step == steps) {
      const double qm = q_mean();
      require_finite(qm, step, "theta state");
      r.sample(t_, qm, r.window_rate());
    }
  }
  r.result.steps = steps;
  return std::move(r.result);
}

// ---------------------------------------------------------------- Morris-Lecar

double ml_m_inf(const kernels::MorrisLecarConstants& c, double V) {
  return 0.5 * (1.0 + std::tanh((V - c.V1) / c.V2));
}
double ml_w_inf(const kernels::MorrisLecarConstants& c, double V) {
  return 0.5 * (1.0 + std::tanh((V - c.V3) / c.V4));
}
double ml_s_inf(double V) { return 1.0 + std::tanh(V / 10.0); }

MorrisLecarSim::MorrisLecarSim(std::shared_ptr<const Network> net, std::vector<double> I_dev,
                               MorrisLecarParams params, const kernels::KernelTable& kernels)
    : net_(std::move(net)), I_dev_(std::move(I_dev)), p_(params), k_(&kernels) {
  const bool synaptic = p_.coupling == MorrisLecarCoupling::synaptic;
  if (!net_) throw ConfigError("network is null");
  // A single uncoupled neuron may use either graph type.
  if (net_->edge_count() > 0) check_network(net_, I_dev_.size(), synaptic);
  if (I_dev_.size() != static_cast<std::size_t>(net_->size()))
    throw ConfigError("heterogeneity vector does not match the network size");
  if (!(p_.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(p_.tau > 0.0)) throw ConfigError("tau must be positive");
  mean_degree_ = safe_mean_degree(*net_);
  const auto n = static_cast<std::size_t>(net_->size());
  V_.assign(n, p_.V_init);
  n_.assign(n, ml_w_inf(p_.c, p_.V_init));
  s_.assign(n, 0.0);
  sums_.resize(n);
  drive_.resize(n);
  V_prev_.resize(n);
}

SimResult MorrisLecarSim::advance(double duration, const RecordOptions& rec) {
  const std::size_t steps = step_count(duration, p_.dt);
  Recorder r(rec, p_.dt, size());
  const std::size_t n = V_.size();
  const bool synaptic = p_.coupling == MorrisLecarCoupling::synaptic;
  const bool coupled = p_.epsilon != 0.0 && net_->edge_count() > 0;
  const auto deg = net_->in_degrees();
  if (t_ == 0.0 || steps == 0) r.sample(t_, mean_of(s_), mean_of(V_));
  for (std::size_t step = 1; step <= steps; ++step) {
    const double c = p_.epsilon / mean_degree_;
    if (!coupled) {
      for (std::size_t i = 0; i < n; ++i) drive_[i] = p_.I0 + I_dev_[i];
    } else if (synaptic) {
      k_->csr_row_sums(net_->in_offsets(), net_->in_neighbors(), s_, sums_);
      for (std::size_t i = 0; i < n; ++i) drive_[i] = p_.I0 + I_dev_[i] + c * sums_[i];
    } else {
      k_->csr_row_sums(net_->in_offsets(), net_->in_neighbors(), V_, sums_);
      for (std::size_t i = 0; i < n; ++i)
        drive_[i] = p_.I0 + I_dev_[i] + c * (sums_[i] - deg[i] * V_[i]);
    }
    std::copy(V_.begin(), V_.end(), V_prev_.begin());
    k_->morris_lecar_step(p_.c, V_, n_, s_, drive_, p_.dt, p_.tau);
    t_ += p_.dt;
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = V_prev_[i] < p_.spike_threshold && V_[i] >= p_.spike_threshold;
      if (up) {
        ++r.result.spike_counts[i];
        ++r.window_spikes;
        if (rec.spikes) r.result.spikes.push_back({t_, static_cast<std::int32_t>(i)});
      }
    }
    if (r.due(step) || step == steps) {
      const double vm = mean_of(V_);
      require_finite(vm + mean_of(n_), step, "Morris-Lecar state");
      r.sample(t_, mean_of(s_), vm);
    }
  }
  r.result.steps = steps;
  return std::move(r.result);
}

// ---------------------------------------------------------------- protocols

std::vector<SweepPoint> quasistatic_sweep(Simulator& sim, SweepTarget target,
                                          std::span<const double> path, double t_per_value,
                                          double window, double record_every) {
  if (!(window > 0.0 && window <= t_per_value))
    throw ConfigError("statistics window must lie within the time per value");
  std::vector<SweepPoint> out;
  out.reserve(path.size());
  for (double v : path) {
    if (target == SweepTarget::drive)
      sim.set_drive(v);
    else
      sim.set_coupling(v);
    const auto res = sim.advance(t_per_value, {record_every, false});
    SweepPoint pt;
    pt.value = v;
    pt.stats = trailing_stats(res, window);
    const double end = res.t.back();
    pt.secondary = window_stats(res.t, res.secondary, end - window, end);
    for (auto c : res.spike_counts) pt.spikes += c;
    out.push_back(pt);
  }
  return out;
}

std::vector<double> up_down_path(double lo, double hi, int steps) {
  if (steps < 1) throw ConfigError("sweep needs at least one step");
  std::vector<double> path;
  for (int i = 0; i <= steps; ++i) path.push_back(lo + (hi - lo) * i / steps);
  for (int i = steps - 1; i >= 0; --i) path.push_back(lo + (hi - lo) * i / steps);
  return path;
}

bool is_firing(Simulator& sim, const OnsetOptions& opts) {
  const double coarse = 1000.0 * sim.dt();
  if (opts.t_transient > 0.0) sim.advance(opts.t_transient, {coarse, false});
  const auto res = sim.advance(opts.t_observe, {coarse, false});
  const auto active = std::count_if(res.spike_counts.begin(), res.spike_counts.end(),
                                    [](std::uint32_t c) { return c > 0; });
  return static_cast<double>(active) >= opts.active_fraction * sim.size();
}

double bisect_firing_onset(const std::function<std::unique_ptr<Simulator>(double)>& make,
                           double lo, double hi, const OnsetOptions& opts) {
  if (!(lo < hi)) throw ConfigError("bisection bracket must satisfy lo < hi");
  if (is_firing(*make(lo), opts)) throw NumericalError("lower bracket end already fires");
  if (!is_firing(*make(hi), opts)) throw NumericalError("upper bracket end does not fire");
  for (int it = 0; it < opts.max_iter && hi - lo > opts.tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (is_firing(*make(mid), opts) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace thetanet
