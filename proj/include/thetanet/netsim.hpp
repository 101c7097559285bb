#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "thetanet/kernels.hpp"
#include "thetanet/network.hpp"

namespace thetanet {

struct Spike {
  double t;
  std::int32_t neuron;
};

// Recorded during one call to Simulator::advance.
struct SimResult {
  std::vector<double> t;
  std::vector<double> primary;    // s_hat (synaptic variable mean) or mean q
  std::vector<double> secondary;  // mean voltage, or population rate
  std::vector<Spike> spikes;      // only when RecordOptions::spikes
  std::vector<std::uint32_t> spike_counts;  // per neuron
  std::size_t steps = 0;
};

struct RecordOptions {
  double every = 0.0;  // sampling interval; 0 samples every step
  bool spikes = false;
};

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t samples = 0;
};

// Population statistics of samples with t in [t_from, t_to].
WindowStats window_stats(std::span<const double> t, std::span<const double> values, double t_from,
                         double t_to);
// Trailing window of the given length ending at the last sample.
WindowStats trailing_stats(const SimResult& r, double window);

// Common interface of the network simulators. The "drive" is the centre of
// the heterogeneous input (eta_0 or I_0); per-neuron deviations are fixed at
// construction. State persists across advance() calls.
class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual std::string primary_name() const = 0;
  virtual std::string secondary_name() const = 0;
  virtual int size() const = 0;
  virtual double time() const = 0;
  virtual double dt() const = 0;
  virtual double drive() const = 0;
  virtual void set_drive(double value) = 0;
  virtual double coupling() const = 0;
  virtual void set_coupling(double value) = 0;
  virtual SimResult advance(double duration, const RecordOptions& rec = {}) = 0;
};

// Theta neurons with pulse-coupled synapses:
//   theta' = 1 - cos + (1 + cos)(eta_i + K/<k> sum_j A_ij u_j),
//   tau u_j' = -u_j, u_j += 1/tau whenever theta_j increases through pi.
class ThetaSynapticSim final : public Simulator {
 public:
  ThetaSynapticSim(std::shared_ptr<const Network> net, std::vector<double> eta_dev, double eta0,
                   double K, double tau, double dt = 1e-3,
                   const kernels::KernelTable& kernels = kernels::active());

  std::string primary_name() const override { return "s_hat"; }
  std::string secondary_name() const override { return "rate"; }
  int size() const override { return net_->size(); }
  double time() const override { return t_; }
  double dt() const override { return dt_; }
  double drive() const override { return eta0_; }
  void set_drive(double v) override { eta0_ = v; }
  double coupling() const override { return K_; }
  void set_coupling(double v) override { K_ = v; }
  SimResult advance(double duration, const RecordOptions& rec = {}) override;

  std::span<double> theta() { return theta_; }
  std::span<double> u() { return u_; }

 private:
  std::shared_ptr<const Network> net_;
  std::vector<double> eta_dev_;
  double eta0_, K_, tau_, dt_, t_ = 0.0;
  double mean_degree_;
  const kernels::KernelTable* k_;
  std::vector<double> theta_, u_, input_, drive_;
  std::vector<std::uint8_t> fired_;
};

// Theta neurons with regularized gap junctions on an undirected network:
//   theta' = 1 - cos - g k_j/<k> sin + (1 + cos)(eta_j + g/<k> sum_l A_jl q(theta_l)),
//   q(theta) = sin / (1 + cos + eps_reg).
class ThetaGapSim final : public Simulator {
 public:
  ThetaGapSim(std::shared_ptr<const Network> net, std::vector<double> eta_dev, double eta0,
              double g, double eps_reg = 0.01, double dt = 1e-3,
              const kernels::KernelTable& kernels = kernels::active());

  std::string primary_name() const override { return "q_mean"; }
  std::string secondary_name() const override { return "rate"; }
  int size() const override { return net_->size(); }
  double time() const override { return t_; }
  double dt() const override { return dt_; }
  double drive() const override { return eta0_; }
  void set_drive(double v) override { eta0_ = v; }
  double coupling() const override { return g_; }
  void set_coupling(double v) override;
  SimResult advance(double duration, const RecordOptions& rec = {}) override;

  std::span<double> theta() { return theta_; }

 private:
  std::shared_ptr<const Network> net_;
  std::vector<double> eta_dev_;
  double eta0_, g_, eps_, dt_, t_ = 0.0;
  double mean_degree_;
  const kernels::KernelTable* k_;
  std::vector<double> theta_, q_, qsum_, drive_, leak_;
  std::vector<std::uint8_t> fired_;
};

enum class MorrisLecarCoupling { synaptic, gap };

struct MorrisLecarParams {
  kernels::MorrisLecarConstants c;
  MorrisLecarCoupling coupling = MorrisLecarCoupling::synaptic;
  double I0 = 40.0;
  double epsilon = 0.0;  // coupling strength
  double tau = 20.0;     // synaptic time constant, ms
  double dt = 0.01;      // ms
  double V_init = -60.0;
  double spike_threshold = 0.0;  // mV, upward crossing counts as a spike
};

// Morris-Lecar network in milliseconds. Synaptic coupling adds
// eps/<k> sum_j A_ij s_j; gap coupling adds eps/<k> sum_j A_ij (V_j - V_i).
// In the gap case s_i is still integrated from V_i as a readout but does not
// feed back.
class MorrisLecarSim final : public Simulator {
 public:
  MorrisLecarSim(std::shared_ptr<const Network> net, std::vector<double> I_dev,
                 MorrisLecarParams params,
                 const kernels::KernelTable& kernels = kernels::active());

  std::string primary_name() const override { return "s_hat"; }
  std::string secondary_name() const override { return "V_mean"; }
  int size() const override { return net_->size(); }
  double time() const override { return t_; }
  double dt() const override { return p_.dt; }
  double drive() const override { return p_.I0; }
  void set_drive(double v) override { p_.I0 = v; }
  double coupling() const override { return p_.epsilon; }
  void set_coupling(double v) override { p_.epsilon = v; }
  SimResult advance(double duration, const RecordOptions& rec = {}) override;

  std::span<double> V() { return V_; }
  std::span<double> n() { return n_; }
  std::span<double> s() { return s_; }

 private:
  std::shared_ptr<const Network> net_;
  std::vector<double> I_dev_;
  MorrisLecarParams p_;
  double t_ = 0.0;
  double mean_degree_;
  const kernels::KernelTable* k_;
  std::vector<double> V_, n_, s_, sums_, drive_, V_prev_;
};

// Single Morris-Lecar neuron (no coupling, no heterogeneity) helpers.
double ml_m_inf(const kernels::MorrisLecarConstants& c, double V);
double ml_w_inf(const kernels::MorrisLecarConstants& c, double V);
double ml_s_inf(double V);

enum class SweepTarget { drive, coupling };

struct SweepPoint {
  double value;
  WindowStats stats;          // of the primary observable
  WindowStats secondary;
  std::uint64_t spikes = 0;   // total over the run at this value
};

// Steps the parameter along `path`, running t_per_value at each value and
// keeping the state between values.
std::vector<SweepPoint> quasistatic_sweep(Simulator& sim, SweepTarget target,
                                          std::span<const double> path, double t_per_value,
                                          double window, double record_every = 0.0);

// Path lo -> hi -> lo with the given number of steps each way (hi visited once).
std::vector<double> up_down_path(double lo, double hi, int steps);

struct OnsetOptions {
  double tol = 1e-3;
  double t_transient = 0.0;
  double t_observe = 1000.0;
  // Fraction of neurons that must spike during the observation window.
  double active_fraction = 0.5;
  int max_iter = 60;
};

// True when at least active_fraction of neurons spike during the observation
// window after the transient.
bool is_firing(Simulator& sim, const OnsetOptions& opts);

// Bisection in the drive for the quiescent -> firing transition. Every trial
// uses a fresh simulator from `make(value)`. Throws NumericalError when the
// bracket does not straddle the transition.
double bisect_firing_onset(const std::function<std::unique_ptr<Simulator>(double)>& make,
                           double lo, double hi, const OnsetOptions& opts = {});

}  // namespace thetanet
