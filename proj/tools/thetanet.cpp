#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thetanet/error.hpp"
#include "thetanet/recipes.hpp"
#include "thetanet/runner.hpp"

using namespace thetanet;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::vector<std::string> set;
  bool paper_scale = false;
  int threads = 1;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ExperimentConfig command_config(const Globals& g, const std::string& model,
                                const std::string& command) {
  ExperimentConfig cfg = g.config ? load_config(*g.config) : default_config(model);
  if (cfg.recipe.empty()) cfg.recipe = command;
  cfg.paper_scale = cfg.paper_scale || g.paper_scale;
  for (const auto& o : g.set) apply_override(cfg, o);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out = *g.out;
  validate(cfg);
  return cfg;
}

void tag(CsvTable& t, const ExperimentConfig& cfg) {
  t.set_meta("command", cfg.recipe);
  t.set_meta("config_hash", hash_hex(config_hash(cfg)));
  t.set_meta("seed", std::to_string(cfg.seed));
}

void run_series(const ExperimentConfig& cfg, const Globals& g, const std::string& command) {
  const auto t0 = Clock::now();
  const Series s = run_model(cfg);
  OutputDir out(cfg.out);
  CsvTable raw;
  tag(raw, cfg);
  raw.set_meta("model", cfg.model);
  raw.header = {"t", s.primary_name, s.secondary_name};
  for (std::size_t i = 0; i < s.t.size(); ++i)
    raw.add_row({cell(s.t[i]), cell(s.primary[i]), cell(s.secondary[i])});
  out.write("series.csv", raw.to_string());
  auto plot = line_table({cfg.model, "t", s.primary_name});
  tag(plot, cfg);
  for (std::size_t i = 0; i < s.t.size(); ++i)
    plot.add_row({s.primary_name, cell(s.t[i]), cell(s.primary[i])});
  out.write_plot(s.primary_name, plot);
  const double t_end = s.t.empty() ? 0.0 : s.t.back();
  const auto w = window_stats(s.t, s.primary, t_end - cfg.param_or("window", t_end), t_end);
  std::cout << s.primary_name << " over the trailing window: mean " << format_double(w.mean)
            << ", std " << format_double(w.stddev) << ", spikes " << s.spikes << '\n';
  write_manifest(out, cfg, command, seconds_since(t0), g.threads);
}

void cmd_simulate(const Globals& g, const std::string& model) {
  const auto cfg = command_config(g, model, "simulate");
  if (!is_network_model(cfg.model))
    throw ConfigError("simulate needs a network model, not '" + cfg.model + "'");
  run_series(cfg, g, "simulate");
}

void cmd_meanfield(const Globals& g, const std::string& model) {
  const auto cfg = command_config(g, model, "meanfield");
  if (!is_meanfield_model(cfg.model))
    throw ConfigError("meanfield needs mf-syn or mf-gap, not '" + cfg.model + "'");
  run_series(cfg, g, "meanfield");
}

void cmd_continue(const Globals& g, const std::string& model, std::string param) {
  auto cfg = command_config(g, model, "continue");
  if (!is_meanfield_model(cfg.model))
    throw ConfigError("continue needs mf-syn or mf-gap, not '" + cfg.model + "'");
  if (param.empty()) param = cfg.continuation.empty() ? "eta0" : cfg.continuation;
  cfg.continuation = param;
  const auto t0 = Clock::now();
  ContinuationOptions o;
  o.ds = cfg.param_or("ds", o.ds);
  o.ds_max = cfg.param_or("ds_max", o.ds_max);
  const double p_end = cfg.param("p_end");

  Branch br;
  std::vector<BifurcationPoint> bif;
  std::function<double(const std::vector<double>&)> readout;
  if (cfg.model == "mf-syn") {
    SynapticSetup s = synaptic_setup(cfg);
    if (cfg.has("p_start")) s.set(param, cfg.param("p_start"));
    br = follow_branch(s, param, p_end, o);
    const auto fam = synaptic_family(s, param);
    for (auto kind : {BifurcationKind::fold, BifurcationKind::hopf})
      for (auto& b : locate_all(fam, br, kind, o)) bif.push_back(b);
    const std::size_t ns = 2 * s.grid_points;
    readout = [ns](const std::vector<double>& x) { return x[ns]; };
  } else {
    GapSetup s = gap_setup(cfg);
    if (cfg.has("p_start")) s.set(param, cfg.param("p_start"));
    br = follow_branch(s, param, p_end, o);
    const auto fam = gap_family(s, param);
    for (auto kind : {BifurcationKind::fold, BifurcationKind::hopf})
      for (auto& b : locate_all(fam, br, kind, o)) bif.push_back(b);
    const auto mf = s.model();
    readout = [mf](const std::vector<double>& x) { return mf.mean_rate(x); };
  }

  OutputDir out(cfg.out);
  auto t = branch_table({"fixed points", param, cfg.model == "mf-syn" ? "s" : "rate"});
  tag(t, cfg);
  for (const auto& smp : br.samples)
    t.add_row({"branch", cell(smp.p), cell(readout(smp.x)), smp.spectrum.stable ? "1" : "0"});
  out.write_plot("branch", t);
  CsvTable bt;
  tag(bt, cfg);
  bt.header = {"kind", param, "re", "im"};
  for (const auto& b : bif) {
    bt.add_row({to_string(b.kind), cell(b.p), cell(b.critical.real()), cell(b.critical.imag())});
    std::cout << to_string(b.kind) << " at " << param << " = " << format_double(b.p) << '\n';
  }
  out.write("bifurcations.csv", bt.to_string());
  std::cout << br.samples.size() << " samples, stopped: " << br.stop_reason << '\n';
  write_manifest(out, cfg, "continue", seconds_since(t0), g.threads);
}

void cmd_sweep(const Globals& g, const std::string& model) {
  const auto cfg = command_config(g, model, "sweep");
  const auto t0 = Clock::now();
  const auto results = grid_sweep(cfg, g.threads);
  OutputDir out(cfg.out);
  out.write("sweep.csv", sweep_table(cfg, results).to_string());
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.error.empty() ? 0 : 1;
  std::cout << results.size() << " points, " << failed << " failed\n";
  write_manifest(out, cfg, "sweep", seconds_since(t0), g.threads);
}

void cmd_figure(const Globals& g, const std::string& name) {
  RunRequest req;
  req.recipe = name;
  if (g.config) req.config_file = *g.config;
  req.overrides = g.set;
  req.seed = g.seed;
  req.out = g.out;
  req.paper_scale = g.paper_scale;
  req.threads = g.threads;
  const auto rep = run_recipe(req, &std::cerr);
  std::cout << name << ": " << rep.files.size() << " files in " << rep.config.out << " ("
            << format_double(std::round(rep.wall_seconds * 10) / 10) << " s)\n";
}

void cmd_netgen(const Globals& g, const std::string& model) {
  const auto cfg = command_config(g, model, "netgen");
  if (!is_network_model(cfg.model))
    throw ConfigError("netgen needs a network model, not '" + cfg.model + "'");
  const auto t0 = Clock::now();
  const auto net = build_network(cfg, cfg.seed);
  OutputDir out(cfg.out);
  std::ostringstream edges;
  write_edge_list(edges, *net);
  out.write("edges.txt", edges.str());
  CsvTable deg;
  tag(deg, cfg);
  deg.header = {"node", "in_degree", "out_degree"};
  for (int i = 0; i < net->size(); ++i)
    deg.add_row({std::to_string(i), std::to_string(net->in_degrees()[i]),
                 std::to_string(net->out_degrees()[i])});
  out.write("degrees.csv", deg.to_string());
  std::cout << net->size() << " nodes, " << net->edge_count() << " edges, mean degree "
            << format_double(net->mean_degree()) << (net->is_simple() ? "" : ", not simple")
            << '\n';
  write_manifest(out, cfg, "netgen", seconds_since(t0), g.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degree-heterogeneous theta and Morris-Lecar networks and their mean fields"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "base seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--config", g.config, "config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.set, "override, key=value (repeatable)");
  app.add_flag("--paper-scale", g.paper_scale, "full network sizes and run lengths");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1, 256));

  std::string sim_model, mf_model, cont_model, sweep_model, ng_model, param, figure;
  bool list = false;
  auto* sim = app.add_subcommand("simulate", "integrate a full network");
  sim->add_option("--model", sim_model, "theta-syn, theta-gap, ml-syn or ml-gap")
      ->default_val("theta-syn");
  auto* mf = app.add_subcommand("meanfield", "integrate a mean-field model");
  mf->add_option("--model", mf_model, "mf-syn or mf-gap")->default_val("mf-syn");
  auto* cont = app.add_subcommand("continue", "follow a branch of fixed points");
  cont->add_option("--model", cont_model, "mf-syn or mf-gap")->default_val("mf-syn");
  cont->add_option("--param", param, "continuation parameter");
  auto* sweep = app.add_subcommand("sweep", "trailing-window statistics over a grid");
  sweep->add_option("--model", sweep_model)->default_val("theta-syn");
  auto* fig = app.add_subcommand("figure", "run a figure recipe");
  fig->add_option("name", figure, "recipe name");
  fig->add_flag("--list", list, "list recipes");
  auto* ng = app.add_subcommand("netgen", "generate a network");
  ng->add_option("--model", ng_model, "network model")->default_val("theta-syn");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) cmd_simulate(g, sim_model);
    else if (*mf) cmd_meanfield(g, mf_model);
    else if (*cont) cmd_continue(g, cont_model, param);
    else if (*sweep) cmd_sweep(g, sweep_model);
    else if (*ng) cmd_netgen(g, ng_model);
    else if (*fig) {
      if (list) {
        for (const auto& r : recipes()) std::cout << r.name << "  " << r.summary << '\n';
        return 0;
      }
      if (figure.empty()) throw ConfigError("figure needs a recipe name (see --list)");
      cmd_figure(g, figure);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
