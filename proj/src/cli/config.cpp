#include "thetanet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "thetanet/error.hpp"

namespace thetanet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

const std::set<std::string, std::less<>> kModels = {"theta-syn", "theta-gap", "ml-syn",
                                                     "ml-gap",    "mf-syn",    "mf-gap"};
const std::set<std::string, std::less<>> kDists = {"in_degree", "out_degree", "degree",
                                                    "heterogeneity"};

std::vector<std::string_view> keys_for_kind(std::string_view dist, std::string_view kind) {
  if (dist == "heterogeneity") {
    heterogeneity_kind_from_string(kind);
    return {"center", "scale"};
  }
  switch (degree_kind_from_string(kind)) {
    case DegreeKind::uniform_width: return {"mean", "sigma"};
    case DegreeKind::shifted_beta: return {"alpha", "lo", "hi"};
    case DegreeKind::degenerate: return {"mean"};
  }
  return {};
}

std::vector<double> parse_axis_values(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == ':') {
        parts.push_back(trim(text.substr(start, i - start)));
        start = i + 1;
      }
    }
    if (parts.size() != 3) throw ConfigError("range must be lo:hi:n, got '" + std::string(text) + "'");
    const double lo = parse_double(parts[0]), hi = parse_double(parts[1]);
    const double nd = parse_double(parts[2]);
    if (!(nd >= 1.0) || nd != std::floor(nd) || nd > 1e6)
      throw ConfigError("range count must be a positive integer");
    const auto n = static_cast<std::size_t>(nd);
    if (n == 1) return {lo};
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
  }
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      const auto item = trim(text.substr(start, i - start));
      if (!item.empty()) out.push_back(parse_double(item));
      start = i + 1;
    }
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + std::string(v) + "'");
}

std::uint64_t parse_seed(std::string_view v) {
  std::uint64_t s = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("seed must be a nonnegative integer, got '" + std::string(v) + "'");
  return s;
}

void set_run_key(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "recipe") cfg.recipe = value;
  else if (key == "model") cfg.model = value;
  else if (key == "seed") cfg.seed = parse_seed(value);
  else if (key == "out") cfg.out = value;
  else if (key == "paper_scale") cfg.paper_scale = parse_bool(value);
  else if (key == "continue") cfg.continuation = value;
  else throw ConfigError("unknown key '" + std::string(key) + "' in [run]");
}

void set_dist_key(DistSpec& d, std::string_view key, std::string_view value) {
  if (key == "kind") d.kind = value;
  else d.values[std::string(key)] = parse_double(value);
}

}  // namespace

double ExperimentConfig::param(std::string_view name) const {
  const auto it = params.find(std::string(name));
  if (it == params.end()) throw ConfigError("missing parameter '" + std::string(name) + "'");
  return it->second;
}

double ExperimentConfig::param_or(std::string_view name, double fallback) const {
  const auto it = params.find(std::string(name));
  return it == params.end() ? fallback : it->second;
}

int ExperimentConfig::int_param(std::string_view name) const {
  const double v = param(name);
  if (v != std::floor(v) || std::abs(v) > 2e9)
    throw ConfigError("parameter '" + std::string(name) + "' must be an integer");
  return static_cast<int>(v);
}

const DistSpec& ExperimentConfig::dist(std::string_view name) const {
  const auto it = dists.find(std::string(name));
  if (it == dists.end()) throw ConfigError("missing [dist " + std::string(name) + "] section");
  return it->second;
}

DegreeDistribution ExperimentConfig::degree(std::string_view name) const {
  const DistSpec& d = dist(name);
  auto get = [&](const char* key) {
    const auto it = d.values.find(key);
    if (it == d.values.end())
      throw ConfigError("[dist " + std::string(name) + "] needs '" + key + "'");
    return it->second;
  };
  switch (degree_kind_from_string(d.kind)) {
    case DegreeKind::uniform_width: return DegreeDistribution::uniform_width(get("mean"), get("sigma"));
    case DegreeKind::shifted_beta:
      return DegreeDistribution::shifted_beta(get("alpha"), get("lo"), get("hi"));
    case DegreeKind::degenerate: return DegreeDistribution::degenerate(get("mean"));
  }
  throw ConfigError("bad degree distribution");
}

HeterogeneityLaw ExperimentConfig::heterogeneity() const {
  const DistSpec& d = dist("heterogeneity");
  const auto c = d.values.find("center"), s = d.values.find("scale");
  if (c == d.values.end() || s == d.values.end())
    throw ConfigError("[dist heterogeneity] needs center and scale");
  return {heterogeneity_kind_from_string(d.kind), c->second, s->second};
}

const GridAxis* ExperimentConfig::axis(std::string_view name) const {
  for (const auto& a : grid)
    if (a.name == name) return &a;
  return nullptr;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, p};
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError("not a finite number: '" + std::string(text) + "'");
  return v;
}

std::string serialize(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[run]\n";
  os << "recipe = " << cfg.recipe << '\n';
  os << "model = " << cfg.model << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "out = " << cfg.out << '\n';
  os << "paper_scale = " << (cfg.paper_scale ? "true" : "false") << '\n';
  if (!cfg.continuation.empty()) os << "continue = " << cfg.continuation << '\n';
  if (!cfg.params.empty()) {
    os << "\n[params]\n";
    for (const auto& [k, v] : cfg.params) os << k << " = " << format_double(v) << '\n';
  }
  for (const auto& [name, d] : cfg.dists) {
    os << "\n[dist " << name << "]\n";
    os << "kind = " << d.kind << '\n';
    for (const auto& [k, v] : d.values) os << k << " = " << format_double(v) << '\n';
  }
  for (const auto& a : cfg.grid) {
    os << "\n[grid " << a.name << "]\nvalues = ";
    for (std::size_t i = 0; i < a.values.size(); ++i)
      os << (i ? ", " : "") << format_double(a.values[i]);
    os << '\n';
  }
  return os.str();
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  cfg.recipe.clear();
  enum class Section { none, run, params, dist, grid } section = Section::none;
  std::string name;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    const auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    if (line.empty() || line.front() == '#' || line.front() == ';') {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
      const auto inner = trim(line.substr(1, line.size() - 2));
      const auto space = inner.find(' ');
      const auto head = inner.substr(0, space);
      name = space == std::string_view::npos ? "" : std::string(trim(inner.substr(space + 1)));
      if (head == "run" && name.empty()) section = Section::run;
      else if (head == "params" && name.empty()) section = Section::params;
      else if (head == "dist" && kDists.count(name)) section = Section::dist;
      else if (head == "grid" && !name.empty()) section = Section::grid;
      else throw ConfigError(where() + "unknown section [" + std::string(inner) + "]");
      if (!seen.insert(std::string(inner)).second)
        throw ConfigError(where() + "duplicate section [" + std::string(inner) + "]");
      if (section == Section::grid) cfg.grid.push_back({name, {}});
      if (section == Section::dist) cfg.dists[name];
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(where() + "expected key = value");
      const auto key = trim(line.substr(0, eq));
      const auto value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(where() + "empty key");
      switch (section) {
        case Section::none: throw ConfigError(where() + "key outside any section");
        case Section::run: set_run_key(cfg, key, value); break;
        case Section::params:
          if (!find_param_spec(key))
            throw ConfigError(where() + "unknown parameter '" + std::string(key) + "'");
          cfg.params[std::string(key)] = parse_double(value);
          break;
        case Section::dist: set_dist_key(cfg.dists[name], key, value); break;
        case Section::grid:
          if (key != "values")
            throw ConfigError(where() + "grid sections only take 'values'");
          cfg.grid.back().values = parse_axis_values(value);
          break;
      }
    }
    if (eol == text.size()) break;
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.out.clear();
  const std::string text = serialize(c);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i, h >>= 4) buf[i] = digits[h & 0xf];
  buf[16] = '\0';
  return buf;
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override must look like key=value: '" + std::string(assignment) + "'");
  const auto key = trim(assignment.substr(0, eq));
  const auto value = trim(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot == std::string_view::npos) {
    if (key == "model" || key == "recipe" || key == "continue" || key == "seed") {
      set_run_key(cfg, key, value);
      return;
    }
    if (!find_param_spec(key)) throw ConfigError("unknown parameter '" + std::string(key) + "'");
    ExperimentConfig one;
    one.params[std::string(key)] = parse_double(value);
    validate(one);
    cfg.params[std::string(key)] = one.params.begin()->second;
    return;
  }
  const std::string head(key.substr(0, dot));
  const std::string sub(key.substr(dot + 1));
  if (head == "grid") {
    GridAxis axis{sub, parse_axis_values(value)};
    auto it = std::find_if(cfg.grid.begin(), cfg.grid.end(),
                           [&](const GridAxis& a) { return a.name == sub; });
    if (it == cfg.grid.end()) cfg.grid.push_back(std::move(axis));
    else *it = std::move(axis);
  } else if (kDists.count(head)) {
    DistSpec& d = cfg.dists[head];
    set_dist_key(d, sub, value);
    if (sub == "kind") {
      // drop keys that do not belong to the new kind
      const auto keys = keys_for_kind(head, d.kind);
      std::erase_if(d.values, [&](const auto& kv) {
        return std::find(keys.begin(), keys.end(), kv.first) == keys.end();
      });
    }
  } else {
    throw ConfigError("unknown override target '" + std::string(key) + "'");
  }
}

const std::vector<ParamSpec>& param_specs() {
  static const std::vector<ParamSpec> specs = {
      {"N", 1, 1e6, true, "number of neurons"},
      {"dt", 1e-6, 1.0, false, "integration step"},
      {"t_end", 1e-9, 1e9, false, "simulated time"},
      {"window", 1e-9, 1e9, false, "trailing statistics window"},
      {"record_every", 0.0, 1e9, false, "sampling interval (0 = every step)"},
      {"t_transient", 0.0, 1e9, false, "discarded transient"},
      {"t_observe", 1e-9, 1e9, false, "observation time"},
      {"t_per_value", 1e-9, 1e9, false, "time per quasistatic sweep value"},
      {"grid_points", 1, 1e4, true, "mean-field degree grid size"},
      {"eta0", -20.0, 20.0, false, "centre of excitability"},
      {"K", -100.0, 100.0, false, "synaptic coupling strength"},
      {"tau", 1e-6, 1e4, false, "synaptic time constant"},
      {"g", 0.0, 20.0, false, "gap-junction coupling strength"},
      {"eps_reg", 1e-9, 1.0, false, "regularization of q(theta)"},
      {"I0", 0.0, 200.0, false, "Morris-Lecar mean input current"},
      {"epsilon", -100.0, 100.0, false, "Morris-Lecar coupling strength"},
      {"leak_weighted", 0, 1, true, "scale gap leak by k/<k> (1) or not (0)"},
      {"p_start", -1e6, 1e6, false, "continuation start"},
      {"p_end", -1e6, 1e6, false, "continuation end"},
      {"ds", 1e-9, 1e3, false, "initial arclength step"},
      {"ds_max", 1e-9, 1e3, false, "largest arclength step"},
      {"sweep_lo", -1e6, 1e6, false, "sweep lower end"},
      {"sweep_hi", -1e6, 1e6, false, "sweep upper end"},
      {"steps", 1, 1e4, true, "sweep steps each way"},
      {"tol", 1e-12, 1.0, false, "bisection tolerance"},
      {"active_fraction", 1e-9, 1.0, false, "fraction of neurons that must fire"},
      {"networks", 1, 1e4, true, "ensemble size"},
      {"panel", 1, 2, true, "figure panel"},
      {"distance", 1e-12, 1.0, false, "distance past a fold for the period check"},
  };
  return specs;
}

const ParamSpec* find_param_spec(std::string_view name) {
  for (const auto& s : param_specs())
    if (s.name == name) return &s;
  return nullptr;
}

void validate(const ExperimentConfig& cfg) {
  if (!cfg.model.empty() && !kModels.count(cfg.model))
    throw ConfigError("unknown model '" + cfg.model + "'");
  for (const auto& [k, v] : cfg.params) {
    const ParamSpec* s = find_param_spec(k);
    if (!s) throw ConfigError("unknown parameter '" + k + "'");
    if (!(v >= s->lo && v <= s->hi))
      throw ConfigError("parameter " + k + " = " + format_double(v) + " outside validated range [" +
                        format_double(s->lo) + ", " + format_double(s->hi) + "]");
    if (s->integer && v != std::floor(v))
      throw ConfigError("parameter " + k + " must be an integer");
  }
  for (const auto& [name, d] : cfg.dists) {
    if (!kDists.count(name)) throw ConfigError("unknown distribution section '" + name + "'");
    if (d.kind.empty()) throw ConfigError("[dist " + name + "] needs a kind");
    const auto keys = keys_for_kind(name, d.kind);
    for (const auto& [k, v] : d.values)
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw ConfigError("unknown key '" + k + "' for " + d.kind + " in [dist " + name + "]");
    for (auto k : keys)
      if (!d.values.count(std::string(k)))
        throw ConfigError("[dist " + name + "] needs '" + std::string(k) + "'");
    if (name == "heterogeneity") cfg.heterogeneity();
    else cfg.degree(name);
  }
  std::set<std::string> names;
  for (const auto& a : cfg.grid) {
    if (!names.insert(a.name).second) throw ConfigError("duplicate grid axis '" + a.name + "'");
    if (a.values.empty()) throw ConfigError("grid axis '" + a.name + "' has no values");
    const auto dot = a.name.find('.');
    if (dot == std::string::npos) {
      ExperimentConfig one;
      for (double v : a.values) {
        one.params[a.name] = v;
        validate(one);
      }
    } else if (!kDists.count(a.name.substr(0, dot))) {
      throw ConfigError("unknown grid axis '" + a.name + "'");
    }
  }
}

DistSpec degree_spec(const DegreeDistribution& d) {
  DistSpec s{std::string(to_string(d.kind())), {}};
  switch (d.kind()) {
    case DegreeKind::uniform_width:
      s.values = {{"mean", d.mean()}, {"sigma", d.half_width()}};
      break;
    case DegreeKind::shifted_beta:
      s.values = {{"alpha", d.alpha()}, {"lo", d.support_lo()}, {"hi", d.support_hi()}};
      break;
    case DegreeKind::degenerate: s.values = {{"mean", d.mean()}}; break;
  }
  return s;
}

DistSpec heterogeneity_spec(const HeterogeneityLaw& h) {
  return {std::string(to_string(h.kind())), {{"center", h.center()}, {"scale", h.scale()}}};
}

}  // namespace thetanet
