#include "thetanet/runner.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "thetanet/error.hpp"
#include "thetanet/integrate.hpp"

namespace thetanet {

bool is_network_model(std::string_view m) {
  return m == "theta-syn" || m == "theta-gap" || m == "ml-syn" || m == "ml-gap";
}

bool is_meanfield_model(std::string_view m) { return m == "mf-syn" || m == "mf-gap"; }

namespace {

bool directed_model(std::string_view m) { return m == "theta-syn" || m == "ml-syn"; }

DistSpec uniform_spec(double mean, double sigma) {
  return {"uniform-width", {{"mean", mean}, {"sigma", sigma}}};
}

DistSpec lorentz_spec(double scale) { return {"lorentzian", {{"center", 0.0}, {"scale", scale}}}; }

}  // namespace

ExperimentConfig default_config(std::string_view model) {
  ExperimentConfig c;
  c.model = model;
  if (model == "theta-syn") {
    c.params = {{"N", 500},     {"eta0", 1},  {"K", -2},      {"tau", 1},
                {"dt", 1e-3},   {"t_end", 40}, {"window", 10}, {"record_every", 0.01}};
    c.dists = {{"in_degree", uniform_spec(100, 5)},
               {"out_degree", uniform_spec(100, 50)},
               {"heterogeneity", lorentz_spec(0.05)}};
  } else if (model == "theta-gap") {
    c.params = {{"N", 500},    {"eta0", 0.2},  {"g", 0.3},      {"eps_reg", 0.01},
                {"dt", 1e-3},  {"t_end", 100}, {"window", 20}, {"record_every", 0.01}};
    c.dists = {{"degree", uniform_spec(100, 50)}, {"heterogeneity", lorentz_spec(0.05)}};
  } else if (model == "ml-syn") {
    c.params = {{"N", 200},     {"I0", 41},      {"epsilon", -1}, {"tau", 20},
                {"dt", 0.01},   {"t_end", 5000}, {"window", 1000}, {"record_every", 1}};
    c.dists = {{"in_degree", uniform_spec(100, 50)},
               {"out_degree", uniform_spec(100, 50)},
               {"heterogeneity", lorentz_spec(0.01)}};
  } else if (model == "ml-gap") {
    c.params = {{"N", 500},     {"I0", 40},      {"epsilon", 0.3}, {"tau", 20},
                {"dt", 0.01},   {"t_end", 5000}, {"window", 2000}, {"record_every", 1}};
    c.dists = {{"degree", uniform_spec(100, 50)}, {"heterogeneity", lorentz_spec(0.5)}};
  } else if (model == "mf-syn") {
    c.params = {{"eta0", 1},        {"K", -2},      {"tau", 1},     {"grid_points", 100},
                {"t_end", 40},      {"window", 10}, {"record_every", 0.05}};
    c.dists = {{"in_degree", uniform_spec(100, 5)}, {"heterogeneity", lorentz_spec(0.05)}};
  } else if (model == "mf-gap") {
    c.params = {{"eta0", 0.2},   {"g", 0.3},      {"grid_points", 100}, {"leak_weighted", 1},
                {"t_end", 200},  {"window", 50},  {"record_every", 0.1}};
    c.dists = {{"degree", uniform_spec(100, 50)}, {"heterogeneity", lorentz_spec(0.05)}};
  } else {
    throw ConfigError("unknown model '" + std::string(model) + "'");
  }
  return c;
}

std::shared_ptr<const Network> build_network(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::network)));
  const int n = cfg.int_param("N");
  const DegreeSequenceOptions opts{SumMatch::repair};
  if (directed_model(cfg.model))
    return std::make_shared<const Network>(
        make_directed_network(cfg.degree("in_degree"), cfg.degree("out_degree"), n, rng, opts));
  return std::make_shared<const Network>(make_undirected_network(cfg.degree("degree"), n, rng, opts));
}

std::vector<double> draw_heterogeneity(const ExperimentConfig& cfg, int n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::heterogeneity)));
  return cfg.heterogeneity().sample(static_cast<std::size_t>(n), rng);
}

std::unique_ptr<Simulator> build_simulator(const ExperimentConfig& cfg) {
  auto net = build_network(cfg, cfg.seed);
  auto dev = draw_heterogeneity(cfg, net->size(), cfg.seed);
  return build_simulator(cfg, std::move(net), std::move(dev));
}

std::unique_ptr<Simulator> build_simulator(const ExperimentConfig& cfg,
                                           std::shared_ptr<const Network> net,
                                           std::vector<double> dev) {
  const std::string& m = cfg.model;
  if (m == "theta-syn")
    return std::make_unique<ThetaSynapticSim>(std::move(net), std::move(dev), cfg.param("eta0"),
                                              cfg.param("K"), cfg.param("tau"), cfg.param("dt"));
  if (m == "theta-gap")
    return std::make_unique<ThetaGapSim>(std::move(net), std::move(dev), cfg.param("eta0"),
                                         cfg.param("g"), cfg.param_or("eps_reg", 0.01),
                                         cfg.param("dt"));
  if (m == "ml-syn" || m == "ml-gap") {
    MorrisLecarParams p;
    p.coupling = m == "ml-syn" ? MorrisLecarCoupling::synaptic : MorrisLecarCoupling::gap;
    p.I0 = cfg.param("I0");
    p.epsilon = cfg.param("epsilon");
    p.tau = cfg.param_or("tau", 20.0);
    p.dt = cfg.param("dt");
    return std::make_unique<MorrisLecarSim>(std::move(net), std::move(dev), p);
  }
  throw ConfigError("model '" + m + "' is not a network model");
}

SynapticSetup synaptic_setup(const ExperimentConfig& cfg) {
  const HeterogeneityLaw h = cfg.heterogeneity();
  if (h.kind() != HeterogeneityKind::lorentzian)
    throw ConfigError("the mean-field reduction needs a Lorentzian heterogeneity");
  SynapticSetup s;
  s.params.eta0 = cfg.param("eta0") + h.center();
  s.params.delta = h.scale();
  s.params.K = cfg.param("K");
  s.params.tau = cfg.param("tau");
  s.grid_points = static_cast<std::size_t>(cfg.int_param("grid_points"));
  const DegreeDistribution d = cfg.degree("in_degree");
  s.kind = d.kind();
  s.mean = d.mean();
  s.sigma = d.half_width();
  if (d.kind() == DegreeKind::shifted_beta) {
    s.alpha = d.alpha();
    s.lo = d.support_lo();
    s.hi = d.support_hi();
  }
  return s;
}

GapSetup gap_setup(const ExperimentConfig& cfg) {
  const HeterogeneityLaw h = cfg.heterogeneity();
  if (h.kind() != HeterogeneityKind::lorentzian)
    throw ConfigError("the mean-field reduction needs a Lorentzian heterogeneity");
  const DegreeDistribution d = cfg.degree("degree");
  if (d.kind() == DegreeKind::shifted_beta)
    throw ConfigError("the gap mean field supports uniform or degenerate degrees");
  GapSetup s;
  s.params.eta0 = cfg.param("eta0") + h.center();
  s.params.delta = h.scale();
  s.params.g = cfg.param("g");
  s.params.degree_weighted_leak = cfg.param_or("leak_weighted", 1.0) != 0.0;
  s.mean = d.mean();
  s.sigma = d.half_width();
  s.grid_points = d.kind() == DegreeKind::degenerate
                      ? 1
                      : static_cast<std::size_t>(cfg.int_param("grid_points"));
  return s;
}

Series run_model(const ExperimentConfig& cfg) {
  Series out;
  const double t_end = cfg.param("t_end");
  const double every = cfg.param_or("record_every", 0.0);
  if (is_network_model(cfg.model)) {
    auto sim = build_simulator(cfg);
    auto r = sim->advance(t_end, {every, false});
    out.t = std::move(r.t);
    out.primary = std::move(r.primary);
    out.secondary = std::move(r.secondary);
    out.primary_name = sim->primary_name();
    out.secondary_name = sim->secondary_name();
    for (auto c : r.spike_counts) out.spikes += c;
    return out;
  }
  const double step = every > 0.0 ? every : 0.01;
  if (cfg.model == "mf-syn") {
    const auto mf = synaptic_setup(cfg).model();
    const auto tr = integrate_sampled(
        [&](double, std::span<const double> y, std::span<double> dy) { mf.rhs(y, dy); },
        mf.initial_state(), 0.0, t_end, step);
    out.t = tr.t;
    for (const auto& y : tr.y) {
      out.primary.push_back(mf.s(y));
      out.secondary.push_back(mf.mean_rate(y));
    }
    out.primary_name = "s";
    out.secondary_name = "rate";
    return out;
  }
  if (cfg.model == "mf-gap") {
    const auto mf = gap_setup(cfg).model();
    const auto tr = integrate_sampled(
        [&](double, std::span<const double> y, std::span<double> dy) { mf.rhs(y, dy); },
        mf.initial_state(), 0.0, t_end, step);
    out.t = tr.t;
    for (const auto& y : tr.y) {
      out.primary.push_back(mf.mean_rate(y));
      out.secondary.push_back(mf.mean_voltage(y));
    }
    out.primary_name = "rate";
    out.secondary_name = "V_mean";
    return out;
  }
  throw ConfigError("unknown model '" + cfg.model + "'");
}

PointResult run_point(const ExperimentConfig& cfg) {
  PointResult r;
  const Series s = run_model(cfg);
  const double t_end = s.t.empty() ? 0.0 : s.t.back();
  r.stats = window_stats(s.t, s.primary, t_end - cfg.param("window"), t_end);
  r.spikes = s.spikes;
  return r;
}

std::vector<PointResult> grid_sweep(const ExperimentConfig& cfg, int threads) {
  if (cfg.grid.empty()) throw ConfigError("sweep needs at least one [grid <name>] axis");
  std::size_t total = 1;
  for (const auto& a : cfg.grid) total *= a.values.size();
  std::vector<PointResult> results(total);
  // resolve every point before running, so bad axes fail fast
  std::vector<ExperimentConfig> points(total);
  for (std::size_t i = 0; i < total; ++i) {
    ExperimentConfig c = cfg;
    c.grid.clear();
    std::size_t rem = i;
    std::vector<double> coords(cfg.grid.size());
    for (std::size_t d = cfg.grid.size(); d-- > 0;) {
      const auto& a = cfg.grid[d];
      coords[d] = a.values[rem % a.values.size()];
      rem /= a.values.size();
    }
    results[i].coords = coords;
    points[i] = std::move(c);
  }
  parallel_for(total, threads, [&](std::size_t i) {
    try {
      for (std::size_t d = 0; d < cfg.grid.size(); ++d)
        apply_override(points[i], cfg.grid[d].name + "=" + format_double(results[i].coords[d]));
      validate(points[i]);
      auto r = run_point(points[i]);
      r.coords = results[i].coords;
      results[i] = std::move(r);
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });
  return results;
}

CsvTable sweep_table(const ExperimentConfig& cfg, const std::vector<PointResult>& results) {
  CsvTable t;
  t.set_meta("config_hash", hash_hex(config_hash(cfg)));
  t.set_meta("seed", std::to_string(cfg.seed));
  t.set_meta("model", cfg.model);
  for (const auto& a : cfg.grid) t.header.push_back(a.name);
  for (const char* h : {"mean", "stddev", "samples", "spikes", "error"}) t.header.push_back(h);
  for (const auto& r : results) {
    std::vector<std::string> row;
    for (double c : r.coords) row.push_back(cell(c));
    row.push_back(cell(r.error.empty() ? r.stats.mean : std::nan("")));
    row.push_back(cell(r.error.empty() ? r.stats.stddev : std::nan("")));
    row.push_back(std::to_string(r.stats.samples));
    row.push_back(std::to_string(r.spikes));
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    row.push_back(err);
    t.add_row(std::move(row));
  }
  return t;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard g(m);
            if (!first) first = std::current_exception();
          }
        }
      });
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace thetanet
