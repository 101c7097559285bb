#include "thetanet/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "thetanet/config.hpp"
#include "thetanet/error.hpp"

namespace thetanet {

void CsvTable::set_meta(std::string key, std::string value) {
  for (auto& kv : meta) {
    if (kv.first == key) {
      kv.second = std::move(value);
      return;
    }
  }
  meta.emplace_back(std::move(key), std::move(value));
}

std::string CsvTable::meta_value(std::string_view key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return kv.second;
  return {};
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ConfigError("CSV has no column '" + std::string(name) + "'");
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ConfigError("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

CsvTable CsvTable::parse(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!t.header.empty())
        throw ConfigError("CSV line " + std::to_string(line_no) + ": metadata after the header");
      const auto colon = line.find(':');
      if (colon == std::string_view::npos)
        throw ConfigError("CSV line " + std::to_string(line_no) + ": metadata needs 'key: value'");
      auto key = line.substr(1, colon - 1);
      auto value = line.substr(colon + 1);
      while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
      while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
      t.meta.emplace_back(std::string(key), std::string(value));
      continue;
    }
    if (line.find('"') != std::string_view::npos)
      throw ConfigError("CSV line " + std::to_string(line_no) + ": quoted fields are not supported");
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        cells.emplace_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else if (cells.size() != t.header.size()) {
      throw ConfigError("CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(cells.size()));
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ConfigError("CSV has no header");
  return t;
}

std::string cell(double v) { return std::isnan(v) ? "nan" : format_double(v); }

double parse_cell(std::string_view s) {
  if (s.empty() || s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return parse_double(s);
}

namespace {

CsvTable table_with(const PlotLabels& l, const char* style, std::vector<std::string> header) {
  CsvTable t;
  t.set_meta("plot", style);
  t.set_meta("title", l.title);
  t.set_meta("xlabel", l.xlabel);
  t.set_meta("ylabel", l.ylabel);
  t.header = std::move(header);
  return t;
}

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  void pad() {
    if (hi - lo < 1e-300) {
      const double d = std::max(std::abs(lo) * 0.05, 1e-12);
      lo -= d;
      hi += d;
    }
  }
};

std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

class Canvas {
 public:
  Canvas(Range x, Range y, const CsvTable& t) : x_(x), y_(y) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    os_ << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    const std::string title = t.meta_value("title");
    if (!title.empty())
      os_ << "<text x=\"" << kLeft << "\" y=\"22\" font-size=\"14\" font-family=\"sans-serif\">"
          << escape(title) << "</text>\n";
    axes(t.meta_value("xlabel"), t.meta_value("ylabel"));
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  double py(double y) const { return kTop + (y_.hi - y) / (y_.hi - y_.lo) * plot_h(); }
  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* colour,
                bool dashed) {
    if (pts.size() < 2) return;
    os_ << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
    if (dashed) os_ << " stroke-dasharray=\"6 4\"";
    os_ << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os_ << (i ? " " : "") << num(px(pts[i].first)) << ',' << num(py(pts[i].second));
    os_ << "\"/>\n";
  }

  void dot(double x, double y, const char* colour) {
    os_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"2.5\" fill=\""
        << colour << "\"/>\n";
  }

  void rect(double x0, double y0, double x1, double y1, const std::string& fill) {
    const double a = px(x0), b = px(x1), c = py(y1), d = py(y0);
    os_ << "<rect x=\"" << num(std::min(a, b)) << "\" y=\"" << num(std::min(c, d))
        << "\" width=\"" << num(std::abs(b - a)) << "\" height=\"" << num(std::abs(d - c))
        << "\" fill=\"" << fill << "\"/>\n";
  }

  void legend(std::size_t row, const std::string& label, const char* colour, bool dashed) {
    const double y = kTop + 12 + 18.0 * static_cast<double>(row);
    const double x = kWidth - kRight + 12;
    os_ << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 20 << "\" y2=\"" << y
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    text(x + 26, y + 4, label, "start");
  }

  void text(double x, double y, std::string_view s, const char* anchor) {
    os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"11\" "
        << "font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << escape(s)
        << "</text>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  void axes(const std::string& xlabel, const std::string& ylabel) {
    const double x0 = kLeft, x1 = kLeft + plot_w(), y0 = kTop + plot_h(), y1 = kTop;
    auto seg = [&](double a, double b, double c, double d) {
      os_ << "<line x1=\"" << num(a) << "\" y1=\"" << num(b) << "\" x2=\"" << num(c)
          << "\" y2=\"" << num(d) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    };
    seg(x0, y0, x1, y0);
    seg(x0, y0, x0, y1);
    for (double v : ticks(x_.lo, x_.hi)) {
      seg(px(v), y0, px(v), y0 + 5);
      text(px(v), y0 + 18, num(v), "middle");
    }
    for (double v : ticks(y_.lo, y_.hi)) {
      seg(x0 - 5, py(v), x0, py(v));
      text(x0 - 8, py(v) + 4, num(v), "end");
    }
    text(kLeft + plot_w() / 2, kHeight - 12, xlabel, "middle");
    os_ << "<text x=\"16\" y=\"" << num(kTop + plot_h() / 2)
        << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 16 " << num(kTop + plot_h() / 2) << ")\">" << escape(ylabel)
        << "</text>\n";
  }

  Range x_, y_;
  std::ostringstream os_;
};

// Series in first-appearance order.
std::vector<std::string> series_order(const CsvTable& t, std::size_t col) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& r : t.rows)
    if (seen.insert(r[col]).second) order.push_back(r[col]);
  return order;
}

std::string render_lines(const CsvTable& t, bool branches) {
  const std::size_t cs = t.column("series"), cx = t.column("x"), cy = t.column("y");
  const std::size_t cst = branches ? t.column("stable") : 0;
  Range xr, yr;
  for (const auto& r : t.rows) {
    const double x = parse_cell(r[cx]), y = parse_cell(r[cy]);
    if (std::isfinite(x) && std::isfinite(y)) {
      xr.add(x);
      yr.add(y);
    }
  }
  if (!xr.valid()) throw ConfigError("plot has no finite data");
  xr.pad();
  yr.pad();
  Canvas c(xr, yr, t);
  const auto order = series_order(t, cs);
  for (std::size_t si = 0; si < order.size(); ++si) {
    const char* colour = kPalette[si % std::size(kPalette)];
    std::vector<std::pair<double, double>> run;
    int run_stable = -1;
    std::size_t points = 0;
    std::pair<double, double> last{};
    bool have_last = false;
    auto flush = [&] {
      if (run.size() == 1 && !branches) c.dot(run[0].first, run[0].second, colour);
      c.polyline(run, colour, branches && run_stable == 0);
      run.clear();
    };
    for (const auto& r : t.rows) {
      if (r[cs] != order[si]) continue;
      const double x = parse_cell(r[cx]), y = parse_cell(r[cy]);
      if (!std::isfinite(x) || !std::isfinite(y)) {
        flush();
        have_last = false;
        continue;
      }
      ++points;
      if (branches) {
        const int st = r[cst] == "1" ? 1 : 0;
        if (st != run_stable && !run.empty()) {
          flush();
          if (have_last) run.push_back(last);  // keep the curve connected
        }
        run_stable = st;
      }
      run.emplace_back(x, y);
      last = {x, y};
      have_last = true;
    }
    flush();
    if (points == 0) throw ConfigError("series '" + order[si] + "' has no finite data");
    c.legend(si, order[si], colour, false);
  }
  return c.finish();
}

std::string colour_map(double u) {
  // dark blue -> teal -> yellow
  static const double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
  u = std::clamp(u, 0.0, 1.0);
  const int i = u < 0.5 ? 0 : 1;
  const double f = u < 0.5 ? u * 2 : (u - 0.5) * 2;
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k)
    rgb[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::vector<double> cell_edges(const std::vector<double>& centres) {
  std::vector<double> e(centres.size() + 1);
  if (centres.size() == 1) {
    const double d = std::max(std::abs(centres[0]) * 0.5, 0.5);
    return {centres[0] - d, centres[0] + d};
  }
  for (std::size_t i = 1; i < centres.size(); ++i) e[i] = 0.5 * (centres[i - 1] + centres[i]);
  e.front() = centres.front() - (e[1] - centres.front());
  e.back() = centres.back() + (centres.back() - e[centres.size() - 1]);
  return e;
}

std::string render_heatmap(const CsvTable& t) {
  const std::size_t cx = t.column("x"), cy = t.column("y"), cv = t.column("value");
  std::set<double> xs, ys;
  Range vr;
  for (const auto& r : t.rows) {
    const double x = parse_cell(r[cx]), y = parse_cell(r[cy]);
    if (!std::isfinite(x) || !std::isfinite(y)) throw ConfigError("heatmap coordinates must be finite");
    xs.insert(x);
    ys.insert(y);
    vr.add(parse_cell(r[cv]));
  }
  if (!vr.valid()) throw ConfigError("plot has no finite data");
  const std::vector<double> xv(xs.begin(), xs.end()), yv(ys.begin(), ys.end());
  const auto xe = cell_edges(xv), ye = cell_edges(yv);
  Range xr, yr;
  xr.add(xe.front());
  xr.add(xe.back());
  yr.add(ye.front());
  yr.add(ye.back());
  Canvas c(xr, yr, t);
  const double span = vr.hi > vr.lo ? vr.hi - vr.lo : 1.0;
  for (const auto& r : t.rows) {
    const double x = parse_cell(r[cx]), y = parse_cell(r[cy]), v = parse_cell(r[cv]);
    const auto i = static_cast<std::size_t>(std::lower_bound(xv.begin(), xv.end(), x) - xv.begin());
    const auto j = static_cast<std::size_t>(std::lower_bound(yv.begin(), yv.end(), y) - yv.begin());
    c.rect(xe[i], ye[j], xe[i + 1], ye[j + 1],
           std::isfinite(v) ? colour_map((v - vr.lo) / span) : std::string("#cccccc"));
  }
  c.text(kWidth - kRight + 12, kTop + 12, "max " + num(vr.hi), "start");
  c.text(kWidth - kRight + 12, kTop + 30, "min " + num(vr.lo), "start");
  return c.finish();
}

}  // namespace

CsvTable line_table(const PlotLabels& l) { return table_with(l, "line", {"series", "x", "y"}); }
CsvTable branch_table(const PlotLabels& l) {
  return table_with(l, "branches", {"series", "x", "y", "stable"});
}
CsvTable heatmap_table(const PlotLabels& l) { return table_with(l, "heatmap", {"x", "y", "value"}); }

std::string render_svg(const CsvTable& table, std::string_view style) {
  const std::string s = style.empty() ? table.meta_value("plot") : std::string(style);
  if (table.rows.empty()) throw ConfigError("plot table has no rows");
  if (s == "line") return render_lines(table, false);
  if (s == "branches") return render_lines(table, true);
  if (s == "heatmap") return render_heatmap(table);
  throw ConfigError("unknown plot style '" + s + "'");
}

void emit_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path,
               std::string_view style) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot read " + csv_path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string svg = render_svg(CsvTable::parse(ss.str()), style);
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + svg_path.string());
  out << svg;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw ConfigError("cannot create output directory " + root_.string() + ": " + ec.message());
}

std::mutex& OutputDir::lock_for(const std::string& name) {
  std::lock_guard g(registry_mutex_);
  auto& m = path_locks_[name];
  if (!m) {
    m = std::make_unique<std::mutex>();
    files_.push_back(name);
  }
  return *m;
}

void OutputDir::write(const std::string& name, const std::string& content) {
  std::lock_guard g(lock_for(name));
  const auto path = root_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

void OutputDir::write_plot(const std::string& name, const CsvTable& table) {
  const std::string svg = render_svg(table);
  write(name + ".csv", table.to_string());
  write(name + ".svg", svg);
}

std::vector<std::string> OutputDir::files() const {
  std::lock_guard g(registry_mutex_);
  return files_;
}

}  // namespace thetanet
