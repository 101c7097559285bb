#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thetanet/error.hpp"
#include "thetanet/recipes.hpp"
#include "thetanet/runner.hpp"

using namespace thetanet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("thetanet_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

ExperimentConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ExperimentConfig c;
  const char* models[] = {"theta-syn", "theta-gap", "ml-syn", "ml-gap", "mf-syn", "mf-gap"};
  c.model = models[rng() % 6];
  c.recipe = "r" + std::to_string(rng() % 100);
  c.seed = rng();
  c.out = "out/x" + std::to_string(rng() % 1000);
  c.paper_scale = rng() % 2;
  if (rng() % 2) c.continuation = "eta0";
  auto draw = [&](const ParamSpec& s) {
    double v = s.lo + (s.hi - s.lo) * u(rng);
    if (s.integer) v = std::round(v);
    return std::clamp(v, s.lo, s.hi);
  };
  for (const auto& s : param_specs())
    if (rng() % 3 == 0) c.params[std::string(s.name)] = draw(s);
  const double mean = 50 + 100 * u(rng);
  c.dists["in_degree"] = {"uniform-width", {{"mean", mean}, {"sigma", mean * u(rng)}}};
  c.dists["heterogeneity"] = {"lorentzian", {{"center", u(rng) - 0.5}, {"scale", u(rng) + 1e-3}}};
  if (rng() % 2) c.dists["degree"] = {"shifted-beta", {{"alpha", 1 + 5 * u(rng)}, {"lo", 50}, {"hi", 150}}};
  const auto& specs = param_specs();
  for (int a = 0; a < static_cast<int>(rng() % 3); ++a) {
    const auto& s = specs[rng() % specs.size()];
    GridAxis ax{std::string(s.name), {}};
    for (int i = 0; i < 1 + static_cast<int>(rng() % 4); ++i) ax.values.push_back(draw(s));
    if (!c.axis(ax.name)) c.grid.push_back(ax);
  }
  return c;
}

ExperimentConfig small_network() {
  ExperimentConfig c = default_config("theta-syn");
  c.recipe = "test";
  c.params["N"] = 200;
  c.params["t_end"] = 2;
  c.params["window"] = 1;
  return c;
}

}  // namespace

TEST_CASE("config round-trips through its text form") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_config(rng);
    const auto text = serialize(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize(back) == text);
    CHECK(config_hash(back) == config_hash(c));
  }
}

TEST_CASE("config hash ignores the output directory only") {
  auto c = default_config("mf-syn");
  const auto h = config_hash(c);
  c.out = "elsewhere";
  CHECK(config_hash(c) == h);
  c.params["eta0"] = 1.0000000000000002;
  CHECK(config_hash(c) != h);
  CHECK(hash_hex(h).size() == 16);
}

TEST_CASE("config parser rejects unknown names and bad values") {
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\n[stuff]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\n[params]\nfoo = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\n[params]\neta0 = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\n[params]\neta0 = inf\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = quux\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\n[params]\nN = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\n[dist in_degree]\nkind = uniform-width\n"
                               "mean = 100\nsigma = 150\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nmodel = mf-syn\nseed = -1\n"), ConfigError);
}

TEST_CASE("overrides") {
  auto c = default_config("theta-syn");
  apply_override(c, "eta0=-0.5");
  CHECK(c.param("eta0") == -0.5);
  apply_override(c, "in_degree.sigma=40");
  CHECK(c.dist("in_degree").values.at("sigma") == 40);
  apply_override(c, "grid.tau=0.5:2:4");
  REQUIRE(c.axis("tau"));
  CHECK(c.axis("tau")->values == std::vector<double>{0.5, 1.0, 1.5, 2.0});
  apply_override(c, "grid.tau=1, 3");
  CHECK(c.axis("tau")->values == std::vector<double>{1.0, 3.0});
  apply_override(c, "in_degree.kind=shifted-beta");
  CHECK(c.dist("in_degree").values.empty());
  CHECK_THROWS_AS(validate(c), ConfigError);
  for (const char* o : {"in_degree.alpha=2", "in_degree.lo=50", "in_degree.hi=150"})
    apply_override(c, o);
  CHECK_NOTHROW(validate(c));
  CHECK_THROWS_AS(apply_override(c, "tau"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "nonsense=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "tau=-1"), ConfigError);
  CHECK(c.param("tau") == 1);
  apply_override(c, "grid.tau=1,-2");
  CHECK_THROWS_AS(validate(c), ConfigError);
  apply_override(c, "grid.tau=1,2");
  apply_override(c, "grid.colour.x=1");
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("csv tables") {
  CsvTable t;
  t.set_meta("seed", "3");
  t.header = {"a", "b"};
  t.add_row({"1", cell(0.1)});
  t.add_row({"x", cell(std::nan(""))});
  const auto back = CsvTable::parse(t.to_string());
  CHECK(back.meta_value("seed") == "3");
  CHECK(back.rows == t.rows);
  CHECK(std::isnan(parse_cell(back.rows[1][1])));
  CHECK(parse_cell(back.rows[0][1]) == 0.1);
  CHECK_THROWS_AS(CsvTable::parse("a,b\n1,2,3\n"), ConfigError);
  CHECK_THROWS_AS(CsvTable::parse("# only: meta\n"), ConfigError);
  CHECK_THROWS_AS(CsvTable::parse("a,b\n\"1\",2\n"), ConfigError);
}

TEST_CASE("emit_plot writes nothing for an empty series") {
  const auto dir = scratch("empty_plot");
  fs::create_directories(dir);
  auto t = line_table({"t", "x", "y"});
  std::ofstream(dir / "e.csv") << t.to_string();
  CHECK_THROWS_AS(emit_plot(dir / "e.csv", dir / "e.svg"), ConfigError);
  CHECK_FALSE(fs::exists(dir / "e.svg"));
  t.add_row({"s", "1", "nan"});
  std::ofstream(dir / "n.csv") << t.to_string();
  CHECK_THROWS_AS(emit_plot(dir / "n.csv", dir / "n.svg"), ConfigError);
  CHECK_FALSE(fs::exists(dir / "n.svg"));
  CHECK_THROWS_AS(emit_plot(dir / "missing.csv", dir / "m.svg"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("svg structure: lines, branches, heat maps") {
  auto line = line_table({"t", "x", "y"});
  for (int i = 0; i < 5; ++i) line.add_row({"a", cell(i), cell(i * i)});
  const auto one = render_svg(line);
  CHECK(count(one, "<polyline") == 1);
  for (int i = 0; i < 5; ++i) line.add_row({"b", cell(i), cell(-i)});
  CHECK(count(render_svg(line), "<polyline") == 2);

  auto br = branch_table({"t", "x", "y"});
  const int stable[] = {1, 1, 0, 0, 1};
  for (int i = 0; i < 5; ++i) br.add_row({"a", cell(i), cell(i), stable[i] ? "1" : "0"});
  const auto b = render_svg(br);
  CHECK(count(b, "stroke-dasharray") == 1);
  CHECK(count(b, "<polyline") == 3);

  auto hm = heatmap_table({"t", "x", "y"});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) hm.add_row({cell(i), cell(j), cell(i + j)});
  CHECK(count(render_svg(hm), "<rect") >= 6);
  CHECK_THROWS_AS(render_svg(line, "pie"), ConfigError);
}

TEST_CASE("fig2 recipe output is a single polyline") {
  const auto dir = scratch("fig2");
  RunRequest req;
  req.recipe = "fig2";
  req.overrides = {"grid.tau=0.5,1", "grid_points=30", "ds_max=8"};
  req.out = dir.string();
  const auto rep = run_recipe(req);
  const auto csv = CsvTable::parse(slurp(dir / "fig2.csv"));
  CHECK(csv.rows.size() == 2);
  CHECK(csv.meta_value("config_hash") == hash_hex(config_hash(rep.config)));
  const auto svg = slurp(dir / "fig2.svg");
  CHECK(count(svg, "<polyline") == 1);
  CHECK(count(svg, "stroke-dasharray") == 0);
  fs::remove_all(dir);
}

TEST_CASE("fig5 recipe output has two branches with dashed unstable parts") {
  const auto dir = scratch("fig5");
  RunRequest req;
  req.recipe = "fig5";
  req.overrides = {"grid_points=30", "p_start=-1.5", "p_end=0.5", "ds_max=0.3"};
  req.out = dir.string();
  run_recipe(req);
  const auto csv = CsvTable::parse(slurp(dir / "fig5.csv"));
  std::set<std::string> series;
  for (const auto& r : csv.rows) series.insert(r[0]);
  CHECK(series.size() == 2);
  const auto svg = slurp(dir / "fig5.svg");
  CHECK(count(svg, "stroke-dasharray") == 2);  // one unstable middle part per branch
  const auto folds = CsvTable::parse(slurp(dir / "fig5_folds.csv"));
  REQUIRE(folds.rows.size() == 2);
  const auto w = folds.column("width");
  CHECK(parse_cell(folds.rows[0][w]) > parse_cell(folds.rows[1][w]));
  fs::remove_all(dir);
}

TEST_CASE("manifest and config file accompany every recipe run") {
  const auto dir = scratch("manifest");
  RunRequest req;
  req.recipe = "gap-hopf";
  req.overrides = {"grid.degree.sigma=0", "p_start=0.15", "p_end=0.3"};
  req.out = dir.string();
  req.seed = 11;
  const auto rep = run_recipe(req);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(j["seed"] == 11);
  CHECK(j["config_hash"] == hash_hex(config_hash(rep.config)));
  CHECK(j["wall_seconds"].get<double>() >= 0.0);
  CHECK(j.contains("version"));
  CHECK(j.contains("compiler"));
  CHECK(load_config(dir / "config.cfg") == rep.config);
  for (const auto& f : j["files"]) CHECK(fs::exists(dir / f.get<std::string>()));
  const auto csv = CsvTable::parse(slurp(dir / "gap-hopf.csv"));
  REQUIRE(csv.rows.size() == 1);
  CHECK(parse_cell(csv.rows[0][1]) == doctest::Approx(0.2219).epsilon(1e-3));
  fs::remove_all(dir);
}

TEST_CASE("recipe errors") {
  RunRequest req;
  req.recipe = "fig99";
  CHECK_THROWS_AS(run_recipe(req), ConfigError);
  req.recipe = "fig5";
  req.overrides = {"K=1e9"};
  CHECK_THROWS_AS(resolve_config(req), ConfigError);
  req.overrides = {"in_degree.sigma=500"};
  CHECK_THROWS_AS(resolve_config(req), ConfigError);
}

TEST_CASE("recipe defaults match the reference parameter table") {
  std::ifstream is(THETANET_TEST_DATA "/reference_constants.txt");
  REQUIRE(is);
  std::string line;
  int checked = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string recipe, scale, key, value;
    if (!(ls >> recipe) || recipe[0] == '#') continue;
    REQUIRE(static_cast<bool>(ls >> scale >> key >> value));
    for (bool paper : {false, true}) {
      if (scale == "full" && !paper) continue;
      const auto c = find_recipe(recipe).defaults(paper);
      INFO(recipe << " " << key << (paper ? " (paper scale)" : ""));
      if (key.rfind("grid.", 0) == 0) {
        const auto* a = c.axis(key.substr(5));
        REQUIRE(a);
        std::vector<double> want;
        std::istringstream vs(value);
        for (std::string item; std::getline(vs, item, ',');) want.push_back(parse_double(item));
        CHECK(a->values == want);
      } else if (const auto dot = key.find('.'); dot != std::string::npos) {
        const auto& d = c.dist(key.substr(0, dot));
        const auto field = key.substr(dot + 1);
        if (field == "kind") CHECK(d.kind == value);
        else CHECK(d.values.at(field) == parse_double(value));
      } else {
        CHECK(c.param(key) == parse_double(value));
      }
      ++checked;
    }
  }
  CHECK(checked > 60);
}

TEST_CASE("every recipe's defaults validate at both scales") {
  for (const auto& r : recipes()) {
    for (bool paper : {false, true}) {
      INFO(r.name);
      const auto c = r.defaults(paper);
      CHECK_NOTHROW(validate(c));
      CHECK(c.recipe == r.name);
      CHECK(parse_config(serialize(c)) == c);
    }
  }
}

TEST_CASE("a 1x1 sweep equals a direct run") {
  auto c = small_network();
  const auto direct = run_point(c);
  c.grid = {{"tau", {c.param("tau")}}};
  const auto swept = grid_sweep(c, 1);
  REQUIRE(swept.size() == 1);
  CHECK(swept[0].error.empty());
  CHECK(swept[0].stats.mean == direct.stats.mean);
  CHECK(swept[0].stats.stddev == direct.stats.stddev);
  CHECK(swept[0].spikes == direct.spikes);
}

TEST_CASE("sweeps are byte-identical across thread counts and record failures") {
  auto c = small_network();
  c.params["t_end"] = 1;
  c.params["window"] = 0.5;
  c.grid = {{"N", {50, 200}}, {"tau", {0.5, 1}}};
  const auto a = sweep_table(c, grid_sweep(c, 1)).to_string();
  const auto b = sweep_table(c, grid_sweep(c, 3)).to_string();
  CHECK(a == b);
  const auto t = CsvTable::parse(a);
  REQUIRE(t.rows.size() == 4);
  const auto err = t.column("error");
  CHECK_FALSE(t.rows[0][err].empty());  // N = 50 cannot hold degree ~100
  CHECK_FALSE(t.rows[1][err].empty());
  CHECK(t.rows[2][err].empty());
  CHECK(t.rows[3][err].empty());
  c.seed = 2;
  CHECK(sweep_table(c, grid_sweep(c, 1)).to_string() != a);
}

TEST_CASE("2x2 Morris-Lecar sweep: narrow in-degrees oscillate more") {
  auto c = default_config("ml-syn");
  c.recipe = "test";
  c.params["t_end"] = 2000;
  c.params["window"] = 1000;
  c.grid = {{"tau", {20, 40}}, {"in_degree.sigma", {10, 90}}};
  const auto r = grid_sweep(c, 2);
  REQUIRE(r.size() == 4);
  for (const auto& p : r) REQUIRE(p.error.empty());
  CHECK(r[0].stats.stddev > r[1].stats.stddev);
  CHECK(r[2].stats.stddev > r[3].stats.stddev);
}

TEST_CASE("parallel_for runs every index and rethrows") {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i]++; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw NumericalError("seven");
                               }),
                  NumericalError);
}
