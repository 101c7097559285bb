#include "thetanet/recipes.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "thetanet/error.hpp"
#include "thetanet/kernels.hpp"
#include "thetanet/runner.hpp"

#ifndef THETANET_VERSION
#define THETANET_VERSION "0.0.0"
#endif

namespace thetanet {

void RecipeContext::note(const std::string& line) const {
  if (log) *log << line << std::endl;
}

void RecipeContext::tag(CsvTable& t, const ExperimentConfig& cfg) const {
  t.set_meta("recipe", cfg.recipe);
  t.set_meta("config_hash", hash_hex(config_hash(cfg)));
  t.set_meta("seed", std::to_string(cfg.seed));
}

namespace {

using Defaults = std::function<ExperimentConfig(bool)>;

DistSpec uniform_spec(double mean, double sigma) {
  return {"uniform-width", {{"mean", mean}, {"sigma", sigma}}};
}

DistSpec law_spec(const char* kind, double scale) {
  return {kind, {{"center", 0.0}, {"scale", scale}}};
}

ExperimentConfig start(const char* recipe, const char* model, bool paper) {
  ExperimentConfig c = default_config(model);
  c.recipe = recipe;
  c.paper_scale = paper;
  return c;
}

const std::vector<double>& axis_values(const ExperimentConfig& cfg, std::string_view name) {
  const GridAxis* a = cfg.axis(name);
  if (!a) throw ConfigError("recipe needs a [grid " + std::string(name) + "] axis");
  return a->values;
}

ExperimentConfig with(const ExperimentConfig& cfg, std::string_view key, double value) {
  ExperimentConfig c = cfg;
  c.grid.clear();
  apply_override(c, std::string(key) + "=" + format_double(value));
  validate(c);
  return c;
}

std::string label(std::string_view name, double v) {
  return std::string(name) + "=" + format_double(v);
}

ContinuationOptions cont_options(const ExperimentConfig& cfg) {
  ContinuationOptions o;
  o.ds = cfg.param("ds");
  o.ds_max = cfg.param("ds_max");
  o.ds_min = std::min(o.ds_min, o.ds * 1e-3);
  return o;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return v;
}

// ---- fig1: reduced model and three networks, one in-degree width ----

ExperimentConfig fig1_defaults(bool paper) {
  ExperimentConfig c = start("fig1", "theta-syn", paper);
  c.params["t_end"] = 40;
  c.params["window"] = 10;
  c.params["record_every"] = 0.05;
  c.params["grid_points"] = 100;
  c.grid = {{"in_degree.sigma", {5, 50}}, {"out_degree.sigma", {90, 50, 10}}};
  return c;
}

void fig1_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& panels = axis_values(cfg, "in_degree.sigma");
  const auto& widths = axis_values(cfg, "out_degree.sigma");
  const std::size_t per = widths.size() + 1;
  std::vector<Series> runs(panels.size() * per);
  parallel_for(runs.size(), ctx.threads, [&](std::size_t idx) {
    const std::size_t p = idx / per, i = idx % per;
    ExperimentConfig c = with(cfg, "in_degree.sigma", panels[p]);
    if (i == 0) {
      c.model = "mf-syn";
      runs[idx] = run_model(c);
      return;
    }
    c = with(c, "out_degree.sigma", widths[i - 1]);
    c.seed = derive_seed(cfg.seed, 100 + idx);  // fresh eta_i per network
    runs[idx] = run_model(c);
  });
  CsvTable stats;
  ctx.tag(stats, cfg);
  stats.header = {"in_sigma", "series", "mean", "stddev", "samples"};
  const double t_end = cfg.param("t_end");
  for (std::size_t p = 0; p < panels.size(); ++p) {
    auto t = line_table({"s for the reduced model and full networks, in-degree " +
                             label("sigma", panels[p]),
                         "t", "s"});
    ctx.tag(t, cfg);
    for (std::size_t i = 0; i < per; ++i) {
      const auto& r = runs[p * per + i];
      std::string name = "reduced";
      if (i > 0) {
        const double w = widths[i - 1];
        name = "network p_out " + format_double(100 - w) + "-" + format_double(100 + w);
      }
      for (std::size_t j = 0; j < r.t.size(); ++j)
        t.add_row({name, cell(r.t[j]), cell(r.primary[j])});
      const auto w = window_stats(r.t, r.primary, t_end - cfg.param("window"), t_end);
      stats.add_row({cell(panels[p]), name, cell(w.mean), cell(w.stddev),
                     std::to_string(w.samples)});
      ctx.note(label("sigma", panels[p]) + " " + name + ": trailing std " +
               format_double(w.stddev));
    }
    ctx.out.write_plot(panels.size() == 1 ? "fig1" : "fig1_" + std::string(1, char('a' + p)), t);
  }
  ctx.out.write("fig1_stats.csv", stats.to_string());
}

// ---- fig2 / fig3: Hopf curves in (width, tau) ----

const std::vector<double> kTauDesk = {0.15, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0,
                                      1.25, 1.5, 2.0, 2.5, 2.8};

ExperimentConfig fig2_defaults(bool paper) {
  ExperimentConfig c = start("fig2", "mf-syn", paper);
  c.dists["in_degree"] = uniform_spec(100, 50);
  c.params = {{"eta0", 1}, {"K", -2}, {"tau", 1}, {"grid_points", 100}, {"p_start", 99},
              {"p_end", 0.5}, {"ds", 1}, {"ds_max", 4}};
  c.grid = {{"tau", paper ? linspace(0.12, 2.9, 40) : kTauDesk}};
  return c;
}

ExperimentConfig fig3_defaults(bool paper) {
  ExperimentConfig c = start("fig3", "mf-syn", paper);
  c.dists["in_degree"] = {"shifted-beta", {{"alpha", 3}, {"lo", 50}, {"hi", 150}}};
  c.params = {{"eta0", 1}, {"K", -2}, {"tau", 1}, {"grid_points", 100}, {"p_start", 1.2},
              {"p_end", 200}, {"ds", 0.5}, {"ds_max", 10}};
  c.grid = {{"tau", paper ? linspace(0.12, 2.9, 40) : kTauDesk}};
  return c;
}

void hopf_curve_run(const ExperimentConfig& cfg, RecipeContext& ctx, const char* p_param,
                    const char* name) {
  const SynapticSetup base = synaptic_setup(cfg);
  const auto& taus = axis_values(cfg, "tau");
  std::vector<std::optional<BifurcationPoint>> found(taus.size());
  const auto opts = cont_options(cfg);
  parallel_for(taus.size(), ctx.threads, [&](std::size_t i) {
    found[i] = scan_codim1(base, "tau", {taus[i]}, p_param, cfg.param("p_start"),
                           cfg.param("p_end"), BifurcationKind::hopf, opts)[0];
  });
  auto t = line_table({"Hopf bifurcation curve", p_param, "tau"});
  ctx.tag(t, cfg);
  CsvTable pts;
  ctx.tag(pts, cfg);
  pts.header = {"tau", p_param, "omega"};
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!found[i]) {
      ctx.note("tau=" + format_double(taus[i]) + ": no Hopf point in range");
      continue;
    }
    t.add_row({"hopf", cell(found[i]->p), cell(taus[i])});
    pts.add_row({cell(taus[i]), cell(found[i]->p), cell(std::abs(found[i]->critical.imag()))});
  }
  ctx.out.write_plot(name, t);
  ctx.out.write(std::string(name) + "_points.csv", pts.to_string());
}

void fig3_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  hopf_curve_run(cfg, ctx, "alpha", "fig3");
  // inset: the law at two shapes
  auto inset = line_table({"beta in-degree densities", "k", "p(k)"});
  ctx.tag(inset, cfg);
  for (double a : {3.0, 20.0}) {
    const auto d = DegreeDistribution::shifted_beta(a, 50, 150);
    for (int i = 0; i <= 200; ++i) {
      const double k = 50.0 + 0.5 * i;
      inset.add_row({label("alpha", a), cell(k), cell(d.density(k))});
    }
  }
  ctx.out.write_plot("fig3_inset", inset);
}

// ---- fig4: Morris-Lecar heat map of trailing std over (sigma, tau) ----

ExperimentConfig fig4_defaults(bool paper) {
  ExperimentConfig c = start("fig4", "ml-syn", paper);
  c.params["N"] = paper ? 500 : 200;
  c.params["t_end"] = paper ? 50000 : 5000;
  c.params["window"] = paper ? 5000 : 1000;
  c.grid = {{"tau", paper ? linspace(5, 100, 20) : linspace(5, 100, 8)},
            {"in_degree.sigma", paper ? linspace(5, 95, 19) : linspace(5, 95, 8)}};
  return c;
}

void fig4_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  axis_values(cfg, "tau");
  axis_values(cfg, "in_degree.sigma");
  const auto results = grid_sweep(cfg, ctx.threads);
  const std::size_t ti = cfg.grid[0].name == "tau" ? 0 : 1;
  auto t = heatmap_table({"std of s_hat over the trailing window", "sigma", "tau"});
  ctx.tag(t, cfg);
  for (const auto& r : results) {
    if (!r.error.empty()) ctx.note("point failed: " + r.error);
    t.add_row({cell(r.coords[1 - ti]), cell(r.coords[ti]),
               cell(r.error.empty() ? r.stats.stddev : std::nan(""))});
  }
  ctx.out.write_plot("fig4", t);
  ctx.out.write("fig4_sweep.csv", sweep_table(cfg, results).to_string());
}

// ---- fig5 / fig6: excitatory fixed points and their folds ----

ExperimentConfig excitatory_defaults(const char* name, bool paper, std::vector<double> sigmas) {
  ExperimentConfig c = start(name, "mf-syn", paper);
  c.dists["in_degree"] = uniform_spec(100, 10);
  c.params = {{"eta0", -3}, {"K", 5}, {"tau", 1}, {"grid_points", 100}, {"p_start", -3},
              {"p_end", 1}, {"ds", 0.05}, {"ds_max", 0.2}};
  c.grid = {{"in_degree.sigma", std::move(sigmas)}};
  return c;
}

struct FoldResult {
  Branch branch;
  std::vector<BifurcationPoint> folds;
};

FoldResult excitatory_branch(const ExperimentConfig& cfg, double sigma) {
  SynapticSetup s = synaptic_setup(with(cfg, "in_degree.sigma", sigma));
  s.kind = DegreeKind::uniform_width;
  s.sigma = sigma;
  s.params.eta0 = cfg.param("p_start");
  const auto opts = cont_options(cfg);
  FoldResult r;
  r.branch = follow_branch(s, "eta0", cfg.param("p_end"), opts);
  r.folds = locate_all(synaptic_family(s, "eta0"), r.branch, BifurcationKind::fold, opts);
  return r;
}

void fig5_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& sigmas = axis_values(cfg, "in_degree.sigma");
  std::vector<FoldResult> res(sigmas.size());
  parallel_for(sigmas.size(), ctx.threads,
               [&](std::size_t i) { res[i] = excitatory_branch(cfg, sigmas[i]); });
  auto t = branch_table({"s at fixed points", "eta0", "s"});
  ctx.tag(t, cfg);
  CsvTable folds;
  ctx.tag(folds, cfg);
  folds.header = {"sigma", "left", "right", "width"};
  const std::size_t ns = 2 * static_cast<std::size_t>(cfg.int_param("grid_points"));
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    for (const auto& smp : res[i].branch.samples)
      t.add_row({label("sigma", sigmas[i]), cell(smp.p), cell(smp.x[ns]),
                 smp.spectrum.stable ? "1" : "0"});
    double lo = std::nan(""), hi = std::nan("");
    for (const auto& f : res[i].folds) {
      lo = std::isnan(lo) ? f.p : std::min(lo, f.p);
      hi = std::isnan(hi) ? f.p : std::max(hi, f.p);
    }
    folds.add_row({cell(sigmas[i]), cell(lo), cell(hi), cell(hi - lo)});
    ctx.note(label("sigma", sigmas[i]) + ": folds at " + format_double(lo) + ", " +
             format_double(hi));
  }
  ctx.out.write_plot(cfg.recipe, t);
  ctx.out.write(cfg.recipe + "_folds.csv", folds.to_string());
}

void fig6_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& sigmas = axis_values(cfg, "in_degree.sigma");
  std::vector<FoldResult> res(sigmas.size());
  parallel_for(sigmas.size(), ctx.threads,
               [&](std::size_t i) { res[i] = excitatory_branch(cfg, sigmas[i]); });
  auto t = line_table({"Curves of saddle-node bifurcations", "eta0", "sigma"});
  ctx.tag(t, cfg);
  for (const char* side : {"left fold", "right fold"}) {
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      if (res[i].folds.size() < 2) {
        ctx.note(label("sigma", sigmas[i]) + ": fewer than two folds");
        continue;
      }
      double lo = res[i].folds[0].p, hi = lo;
      for (const auto& f : res[i].folds) {
        lo = std::min(lo, f.p);
        hi = std::max(hi, f.p);
      }
      t.add_row({side, cell(side[0] == 'l' ? lo : hi), cell(sigmas[i])});
    }
  }
  ctx.out.write_plot("fig6", t);
}

// ---- fig7: Morris-Lecar quasistatic hysteresis in I0 ----

ExperimentConfig fig7_defaults(bool paper) {
  ExperimentConfig c = start("fig7", "ml-syn", paper);
  c.dists["in_degree"] = uniform_spec(100, 10);
  c.params["N"] = paper ? 500 : 200;
  c.params["epsilon"] = 25;
  c.params["tau"] = 20;
  c.params["I0"] = 35.5;
  c.params["sweep_lo"] = 35.5;
  c.params["sweep_hi"] = 40;
  c.params["steps"] = 18;
  c.params["t_per_value"] = paper ? 10000 : 2000;
  c.params["window"] = paper ? 2000 : 400;
  c.params.erase("t_end");
  c.grid = {{"in_degree.sigma", {10, 90}}};
  return c;
}

void fig7_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& sigmas = axis_values(cfg, "in_degree.sigma");
  const int steps = cfg.int_param("steps");
  const auto path = up_down_path(cfg.param("sweep_lo"), cfg.param("sweep_hi"), steps);
  std::vector<std::vector<SweepPoint>> res(sigmas.size());
  parallel_for(sigmas.size(), ctx.threads, [&](std::size_t i) {
    auto sim = build_simulator(with(cfg, "in_degree.sigma", sigmas[i]));
    res[i] = quasistatic_sweep(*sim, SweepTarget::drive, path, cfg.param("t_per_value"),
                               cfg.param("window"), cfg.param("record_every"));
  });
  auto t = line_table({"Approximate steady states, Morris-Lecar", "I0", "s_bar"});
  ctx.tag(t, cfg);
  CsvTable pts;
  ctx.tag(pts, cfg);
  pts.header = {"sigma", "direction", "I0", "s_bar", "s_std", "spikes"};
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    for (std::size_t j = 0; j < res[i].size(); ++j) {
      const auto& p = res[i][j];
      for (const char* dir : {"up", "down"}) {
        const bool up = dir[0] == 'u';
        if ((up && j > static_cast<std::size_t>(steps)) ||
            (!up && j < static_cast<std::size_t>(steps)))
          continue;
        t.add_row({label("sigma", sigmas[i]) + " " + dir, cell(p.value), cell(p.stats.mean)});
        if (up || j > static_cast<std::size_t>(steps))
          pts.add_row({cell(sigmas[i]), dir, cell(p.value), cell(p.stats.mean),
                       cell(p.stats.stddev), std::to_string(p.spikes)});
      }
    }
  }
  ctx.out.write_plot("fig7", t);
  ctx.out.write("fig7_points.csv", pts.to_string());
}

// ---- gap-junction mean field: SNIC and Hopf curves ----

ExperimentConfig gap_snic_defaults(bool paper) {
  ExperimentConfig c = start("gap-snic", "mf-gap", paper);
  c.dists["heterogeneity"] = law_spec("lorentzian", 0.01);
  c.params = {{"eta0", 0},        {"g", 0.4},         {"grid_points", 100},
              {"leak_weighted", 1}, {"p_start", -0.002}, {"p_end", 0.004},
              {"ds", 1e-3},        {"ds_max", 0.05},   {"distance", 4e-5},
              {"t_transient", 3000}, {"t_observe", 4000}};
  c.grid = {{"degree.sigma",
             paper ? linspace(0, 50, 11) : std::vector<double>{0, 10, 20, 30, 40, 50}}};
  return c;
}

GapSetup gap_at(const ExperimentConfig& cfg, double sigma) {
  GapSetup s = gap_setup(cfg);
  s.sigma = sigma;
  s.grid_points = sigma == 0.0 ? 1 : static_cast<std::size_t>(cfg.int_param("grid_points"));
  return s;
}

std::optional<BifurcationPoint> first_on_branch(const GapSetup& s, std::string_view param,
                                                double p_end, BifurcationKind kind,
                                                const ContinuationOptions& opts) {
  return scan_codim1(s, "sigma", {s.sigma}, param, s.get(param), p_end, kind, opts)[0];
}

void gap_snic_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& sigmas = axis_values(cfg, "degree.sigma");
  struct Row {
    std::optional<BifurcationPoint> fold;
    double p1 = std::nan(""), p4 = std::nan("");
  };
  std::vector<Row> rows(sigmas.size());
  const double d = cfg.param("distance");
  parallel_for(sigmas.size(), ctx.threads, [&](std::size_t i) {
    GapSetup s = gap_at(cfg, sigmas[i]);
    s.params.eta0 = cfg.param("p_start");
    rows[i].fold = first_on_branch(s, "eta0", cfg.param("p_end"), BifurcationKind::fold,
                                   cont_options(cfg));
    if (!rows[i].fold) return;
    for (int k = 0; k < 2; ++k) {
      GapSetup past = s;
      past.params.eta0 = rows[i].fold->p + (k == 0 ? d : d / 4);
      IntegrateOptions io;
      io.adaptive = true;
      io.tol = 1e-10;
      io.dt_max = 5.0;
      (k == 0 ? rows[i].p1 : rows[i].p4) =
          gap_period(past, cfg.param("t_transient"), cfg.param("t_observe"), io);
    }
  });
  auto t = line_table({"SNIC bifurcation curve", "eta0", "sigma"});
  ctx.tag(t, cfg);
  CsvTable per;
  ctx.tag(per, cfg);
  per.header = {"sigma", "eta0_star", "distance", "period", "period_quarter", "ratio"};
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!rows[i].fold) {
      ctx.note(label("sigma", sigmas[i]) + ": no fold in range");
      continue;
    }
    t.add_row({"snic", cell(rows[i].fold->p), cell(sigmas[i])});
    per.add_row({cell(sigmas[i]), cell(rows[i].fold->p), cell(d), cell(rows[i].p1),
                 cell(rows[i].p4), cell(rows[i].p4 / rows[i].p1)});
  }
  ctx.out.write_plot("gap-snic", t);
  ctx.out.write("gap-snic_periods.csv", per.to_string());
}

ExperimentConfig gap_hopf_defaults(bool paper) {
  ExperimentConfig c = start("gap-hopf", "mf-gap", paper);
  c.dists["heterogeneity"] = law_spec("lorentzian", 0.05);
  c.params = {{"eta0", 0.2},  {"g", 0.05},  {"grid_points", 100}, {"leak_weighted", 1},
              {"p_start", 0.05}, {"p_end", 1}, {"ds", 0.02},       {"ds_max", 0.05}};
  c.grid = {{"degree.sigma",
             paper ? linspace(0, 50, 11) : std::vector<double>{0, 10, 20, 30, 40, 50}}};
  return c;
}

void gap_hopf_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& sigmas = axis_values(cfg, "degree.sigma");
  std::vector<std::optional<BifurcationPoint>> found(sigmas.size());
  parallel_for(sigmas.size(), ctx.threads, [&](std::size_t i) {
    GapSetup s = gap_at(cfg, sigmas[i]);
    s.params.g = cfg.param("p_start");
    found[i] = first_on_branch(s, "g", cfg.param("p_end"), BifurcationKind::hopf,
                               cont_options(cfg));
  });
  auto t = line_table({"Hopf bifurcation curve", "g", "sigma"});
  ctx.tag(t, cfg);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!found[i]) {
      ctx.note(label("sigma", sigmas[i]) + ": no Hopf point in range");
      continue;
    }
    t.add_row({"hopf", cell(found[i]->p), cell(sigmas[i])});
  }
  ctx.out.write_plot("gap-hopf", t);
}

// ---- gap-junction Morris-Lecar networks ----

ExperimentConfig ml_gap_hopf_defaults(bool paper) {
  ExperimentConfig c = start("ml-gap-hopf", "ml-gap", paper);
  c.params["N"] = paper ? 2500 : 300;
  c.params["t_end"] = paper ? 20000 : 4000;
  c.params["window"] = paper ? 10000 : 2000;
  c.grid = {{"degree.sigma", {10, 50, 90}},
            {"epsilon", paper ? linspace(0, 0.6, 31) : linspace(0, 0.5, 11)}};
  return c;
}

void ml_gap_hopf_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  axis_values(cfg, "degree.sigma");
  axis_values(cfg, "epsilon");
  const auto results = grid_sweep(cfg, ctx.threads);
  const std::size_t si = cfg.grid[0].name == "degree.sigma" ? 0 : 1;
  auto t = line_table({"std of s_hat, gap-junction Morris-Lecar", "epsilon", "std"});
  ctx.tag(t, cfg);
  for (const auto& r : results) {
    if (!r.error.empty()) ctx.note("point failed: " + r.error);
    t.add_row({label("sigma", r.coords[si]), cell(r.coords[1 - si]),
               cell(r.error.empty() ? r.stats.stddev : std::nan(""))});
  }
  ctx.out.write_plot("ml-gap-hopf", t);
  ctx.out.write("ml-gap-hopf_sweep.csv", sweep_table(cfg, results).to_string());
}

ExperimentConfig ml_gap_iid_defaults(bool paper) {
  ExperimentConfig c = start("ml-gap-hopf-iid", "ml-gap", paper);
  c.dists.erase("heterogeneity");  // the panel fixes the law
  c.params["panel"] = 1;
  c.params["N"] = paper ? 2500 : 300;
  c.params["epsilon"] = 0;
  c.params["sweep_lo"] = 0;
  c.params["sweep_hi"] = 0.6;
  c.params["steps"] = paper ? 24 : 12;
  c.params["t_per_value"] = paper ? 20000 : 4000;
  c.params["window"] = paper ? 10000 : 2000;
  c.params.erase("t_end");
  c.grid = {{"degree.sigma", {10, 90}}};
  return c;
}

void ml_gap_iid_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& sigmas = axis_values(cfg, "degree.sigma");
  const auto path = linspace(cfg.param("sweep_lo"), cfg.param("sweep_hi"), cfg.int_param("steps") + 1);
  // panel 1: unit Gaussian; panel 2: uniform on [-1, 1]
  const auto law = cfg.int_param("panel") == 1 ? HeterogeneityLaw::gaussian(0.0, 1.0)
                                                : HeterogeneityLaw::uniform(0.0, 1.0);
  std::vector<std::vector<SweepPoint>> res(sigmas.size());
  parallel_for(sigmas.size(), ctx.threads, [&](std::size_t i) {
    ExperimentConfig c = with(cfg, "degree.sigma", sigmas[i]);
    c.dists["heterogeneity"] = heterogeneity_spec(law);
    auto sim = build_simulator(c);
    res[i] = quasistatic_sweep(*sim, SweepTarget::coupling, path, cfg.param("t_per_value"),
                               cfg.param("window"), cfg.param("record_every"));
  });
  auto t = line_table({"std of s_hat, increasing epsilon", "epsilon", "std"});
  ctx.tag(t, cfg);
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    for (const auto& p : res[i])
      t.add_row({label("sigma", sigmas[i]), cell(p.value), cell(p.stats.stddev)});
  ctx.out.write_plot("ml-gap-hopf-iid", t);
}

ExperimentConfig ml_gap_onset_defaults(bool paper) {
  ExperimentConfig c = start("ml-gap-onset", "ml-gap", paper);
  c.dists.erase("heterogeneity");  // the panel fixes the two laws
  c.params["N"] = paper ? 2500 : 300;
  c.params["panel"] = 1;
  c.params["sweep_lo"] = 39.3;
  c.params["sweep_hi"] = 39.8;
  c.params["tol"] = paper ? 1e-3 : 5e-3;
  c.params["t_transient"] = 0;
  c.params["t_observe"] = paper ? 10000 : 3000;
  c.params["active_fraction"] = 0.5;
  c.params.erase("t_end");
  c.params.erase("window");
  c.grid = {{"degree.sigma", {10, 50, 90}}};
  return c;
}

void ml_gap_onset_run(const ExperimentConfig& cfg, RecipeContext& ctx) {
  const auto& sigmas = axis_values(cfg, "degree.sigma");
  const bool wide = cfg.int_param("panel") == 1;
  const std::vector<std::pair<std::string, HeterogeneityLaw>> laws = {
      {"uniform", HeterogeneityLaw::uniform(0.0, wide ? 0.5 : 0.125)},
      {"gaussian", HeterogeneityLaw::gaussian(0.0, wide ? 1.0 / 3.0 : 0.1)}};
  OnsetOptions o;
  o.tol = cfg.param("tol");
  o.t_transient = cfg.param("t_transient");
  o.t_observe = cfg.param("t_observe");
  o.active_fraction = cfg.param("active_fraction");
  std::vector<double> onset(sigmas.size() * laws.size(), std::nan(""));
  std::vector<std::string> errors(onset.size());
  parallel_for(onset.size(), ctx.threads, [&](std::size_t idx) {
    const std::size_t i = idx / laws.size(), l = idx % laws.size();
    ExperimentConfig c = with(cfg, "degree.sigma", sigmas[i]);
    c.dists["heterogeneity"] = heterogeneity_spec(laws[l].second);
    const auto net = build_network(c, c.seed);
    const auto dev = draw_heterogeneity(c, net->size(), c.seed);
    try {
      onset[idx] = bisect_firing_onset(
          [&](double I0) {
            ExperimentConfig ci = c;
            ci.params["I0"] = I0;
            return build_simulator(ci, net, dev);
          },
          cfg.param("sweep_lo"), cfg.param("sweep_hi"), o);
    } catch (const NumericalError& e) {
      errors[idx] = e.what();
    }
  });
  auto t = line_table({"firing onset, gap-junction Morris-Lecar", "sigma", "I0"});
  ctx.tag(t, cfg);
  for (std::size_t l = 0; l < laws.size(); ++l) {
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      const std::size_t idx = i * laws.size() + l;
      if (!errors[idx].empty()) ctx.note(laws[l].first + " " + label("sigma", sigmas[i]) + ": " + errors[idx]);
      t.add_row({laws[l].first, cell(sigmas[i]), cell(onset[idx])});
    }
  }
  ctx.out.write_plot("ml-gap-onset", t);
}

std::vector<Recipe> build_registry() {
  return {
      {"fig1", "s(t) for the reduced model and three full networks (inhibitory)", fig1_defaults,
       fig1_run},
      {"fig2", "Hopf curve in (sigma, tau), uniform in-degrees", fig2_defaults,
       [](const ExperimentConfig& c, RecipeContext& x) { hopf_curve_run(c, x, "sigma", "fig2"); }},
      {"fig3", "Hopf curve in (alpha, tau), beta in-degrees", fig3_defaults, fig3_run},
      {"fig4", "Morris-Lecar std of s_hat over (sigma, tau)", fig4_defaults, fig4_run},
      {"fig5", "excitatory fixed-point branches in eta0 at two widths",
       [](bool p) { return excitatory_defaults("fig5", p, {10, 90}); }, fig5_run},
      {"fig6", "saddle-node curves in (eta0, sigma)",
       [](bool p) {
         return excitatory_defaults("fig6", p, p ? linspace(5, 95, 19) : linspace(5, 95, 10));
       },
       fig6_run},
      {"fig7", "Morris-Lecar up/down sweep in I0 at two widths", fig7_defaults, fig7_run},
      {"gap-snic", "gap-junction mean field: fold eta0*(sigma) and period scaling",
       gap_snic_defaults, gap_snic_run},
      {"gap-hopf", "gap-junction mean field: Hopf g*(sigma)", gap_hopf_defaults, gap_hopf_run},
      {"ml-gap-hopf", "gap-junction Morris-Lecar: std of s_hat against epsilon",
       ml_gap_hopf_defaults, ml_gap_hopf_run},
      {"ml-gap-hopf-iid", "gap-junction Morris-Lecar, non-Lorentzian I_i, epsilon swept up",
       ml_gap_iid_defaults, ml_gap_iid_run},
      {"ml-gap-onset", "gap-junction Morris-Lecar: firing onset I0* by bisection",
       ml_gap_onset_defaults, ml_gap_onset_run},
  };
}

}  // namespace

const std::vector<Recipe>& recipes() {
  static const std::vector<Recipe> registry = build_registry();
  return registry;
}

const Recipe& find_recipe(std::string_view name) {
  for (const auto& r : recipes())
    if (r.name == name) return r;
  std::string known;
  for (const auto& r : recipes()) known += (known.empty() ? "" : ", ") + r.name;
  throw ConfigError("unknown recipe '" + std::string(name) + "' (known: " + known + ")");
}

ExperimentConfig resolve_config(const RunRequest& req) {
  const Recipe& r = find_recipe(req.recipe);
  ExperimentConfig cfg;
  if (req.config_file) {
    cfg = load_config(*req.config_file);
    if (!cfg.recipe.empty() && cfg.recipe != r.name)
      throw ConfigError("config file is for recipe '" + cfg.recipe + "', not '" + r.name + "'");
    cfg.recipe = r.name;
  } else {
    cfg = r.defaults(req.paper_scale);
  }
  for (const auto& o : req.overrides) apply_override(cfg, o);
  if (req.seed) cfg.seed = *req.seed;
  if (req.out) cfg.out = *req.out;
  validate(cfg);
  return cfg;
}

RunReport run_recipe(const RunRequest& req, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = resolve_config(req);
  const Recipe& r = find_recipe(rep.config.recipe);
  OutputDir out(rep.config.out);
  RecipeContext ctx{out, std::max(1, req.threads), log};
  r.run(rep.config, ctx);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out, rep.config, "figure " + r.name, rep.wall_seconds, ctx.threads);
  rep.files = out.files();
  return rep;
}

std::string manifest_json(const ExperimentConfig& cfg, std::string_view command,
                          const std::vector<std::string>& files, double wall_seconds,
                          int threads) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["recipe"] = cfg.recipe;
  j["model"] = cfg.model;
  j["seed"] = cfg.seed;
  j["config_hash"] = hash_hex(config_hash(cfg));
  j["config"] = serialize(cfg);
  j["paper_scale"] = cfg.paper_scale;
  j["version"] = THETANET_VERSION;
  j["compiler"] = __VERSION__;
  j["kernels"] = std::string(kernels::to_string(kernels::active().isa));
  j["threads"] = threads;
  j["wall_seconds"] = wall_seconds;
  j["files"] = files;
  return j.dump(2) + "\n";
}

void write_manifest(OutputDir& out, const ExperimentConfig& cfg, std::string_view command,
                    double wall_seconds, int threads) {
  out.write("config.cfg", serialize(cfg));
  auto files = out.files();
  files.push_back("manifest.json");
  out.write("manifest.json", manifest_json(cfg, command, files, wall_seconds, threads));
}

}  // namespace thetanet
