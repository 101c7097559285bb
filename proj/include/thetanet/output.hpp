#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace thetanet {

// CSV with leading `# key: value` metadata lines. Plot tables are long
// format: `series,x,y` (line), `series,x,y,stable` (branches) or `x,y,value`
// (heatmap), with the style in the `plot` metadata key.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void set_meta(std::string key, std::string value);
  std::string meta_value(std::string_view key) const;  // empty if absent
  // Index of a header column; throws ConfigError when missing.
  std::size_t column(std::string_view name) const;
  void add_row(std::vector<std::string> row);

  std::string to_string() const;
  // Throws ConfigError on ragged rows, a missing header or stray quotes.
  static CsvTable parse(std::string_view text);
};

// Shortest round-trip text; "nan" for NaN.
std::string cell(double v);
double parse_cell(std::string_view s);  // "nan" and empty give NaN

struct PlotLabels {
  std::string title;
  std::string xlabel;
  std::string ylabel;
};

CsvTable line_table(const PlotLabels& labels);
CsvTable branch_table(const PlotLabels& labels);
CsvTable heatmap_table(const PlotLabels& labels);

// Renders a plot table. `style` overrides the table's `plot` key. Throws
// ConfigError for unknown styles, missing columns or no finite data.
std::string render_svg(const CsvTable& table, std::string_view style = {});

// Reads csv_path and writes svg_path; nothing is written on error.
void emit_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path,
               std::string_view style = {});

// Output directory. Writes to the same path are serialized; files are listed
// in write order for the manifest.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& name, const std::string& content);
  // Writes name.csv and name.svg.
  void write_plot(const std::string& name, const CsvTable& table);
  std::vector<std::string> files() const;

 private:
  std::mutex& lock_for(const std::string& name);

  std::filesystem::path root_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> path_locks_;
  std::vector<std::string> files_;
};

}  // namespace thetanet
