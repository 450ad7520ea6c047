#include "covfdr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "covfdr/stats.hpp"

namespace covfdr {

using nlohmann::json;

std::string library_version() { return "0.1.0"; }

void AnalysisConfig::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw DataError("config: q outside (0,1)");
  if (null_mode != "theoretical" && null_mode != "empirical")
    throw DataError("config: null_mode must be theoretical or empirical");
  if (basis != "cubic" && basis != "flat-interval")
    throw DataError("config: basis must be cubic or flat-interval");
  if (correction != "none" && correction != "plug-in-zero" && correction != "pa0-hat")
    throw DataError("config: unknown correction mode");
  if (density_basis != "spline" && density_basis != "polynomial")
    throw DataError("config: density_basis must be spline or polynomial");
  if (!(central_fraction > 0.0 && central_fraction < 1.0))
    throw DataError("config: central_fraction outside (0,1)");
  if (density_df < 2) throw DataError("config: density_df must be >= 2");
}

namespace {

json config_to_json(const AnalysisConfig& c) {
  json j;
  j["input_path"] = c.input_path;
  j["z_column"] = c.z_column;
  j["covariate_columns"] = c.covariate_columns;
  if (c.class_column) j["class_column"] = *c.class_column;
  if (c.set_file) j["set_file"] = *c.set_file;
  j["null_mode"] = c.null_mode;
  j["q"] = c.q;
  if (c.bin_lo) j["bin_lo"] = *c.bin_lo;
  if (c.bin_hi) j["bin_hi"] = *c.bin_hi;
  if (c.bin_count) j["bin_count"] = *c.bin_count;
  j["basis"] = c.basis;
  j["correction"] = c.correction;
  j["central_fraction"] = c.central_fraction;
  j["density_df"] = c.density_df;
  j["density_basis"] = c.density_basis;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

AnalysisConfig config_from_json(const json& j) {
  AnalysisConfig c;
  c.input_path = j.value("input_path", "");
  c.z_column = j.value("z_column", "z");
  c.covariate_columns = j.value("covariate_columns", std::vector<std::string>{});
  if (j.contains("class_column")) c.class_column = j["class_column"].get<std::string>();
  if (j.contains("set_file")) c.set_file = j["set_file"].get<std::string>();
  c.null_mode = j.value("null_mode", "empirical");
  c.q = j.value("q", 0.1);
  if (j.contains("bin_lo")) c.bin_lo = j["bin_lo"].get<double>();
  if (j.contains("bin_hi")) c.bin_hi = j["bin_hi"].get<double>();
  if (j.contains("bin_count")) c.bin_count = j["bin_count"].get<int>();
  c.basis = j.value("basis", "cubic");
  c.correction = j.value("correction", "none");
  c.central_fraction = j.value("central_fraction", 0.85);
  c.density_df = j.value("density_df", 7);
  c.density_basis = j.value("density_basis", "spline");
  c.seed = j.value("seed", std::uint64_t{1});
  c.output_dir = j.value("output_dir", ".");
  return c;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.push_back("");
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::string AnalysisConfig::to_json() const { return config_to_json(*this).dump(2); }

AnalysisConfig AnalysisConfig::from_json(const std::string& text) {
  return config_from_json(json::parse(text));
}

Dataset load_table(const std::string& path, const AnalysisConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw DataError("empty file: " + path);
  header = strip_cr(header);
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> names = split_line(header, delim);

  auto column_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    return std::nullopt;
  };

  const auto z_idx = column_index(cfg.z_column);
  if (!z_idx) throw DataError("missing column " + cfg.z_column);
  const auto id_idx = column_index("id");
  std::optional<std::size_t> class_idx;
  if (cfg.class_column) {
    class_idx = column_index(*cfg.class_column);
    if (!class_idx) throw DataError("missing column " + *cfg.class_column);
  }

  std::vector<std::pair<std::string, std::size_t>> covariate_cols;
  if (!cfg.covariate_columns.empty()) {
    for (const auto& name : cfg.covariate_columns) {
      const auto idx = column_index(name);
      if (!idx) throw DataError("missing column " + name);
      covariate_cols.emplace_back(name, *idx);
    }
  } else {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i == *z_idx || (id_idx && i == *id_idx) || (class_idx && i == *class_idx)) continue;
      covariate_cols.emplace_back(names[i], i);
    }
  }

  std::vector<Case> cases;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_line(line, delim);
    if (fields.size() != names.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(names.size()) + " fields, got " +
                      std::to_string(fields.size()));
    Case c;
    c.id = id_idx ? fields[*id_idx] : "row-" + std::to_string(row);
    try {
      std::size_t pos = 0;
      c.z = std::stod(fields[*z_idx], &pos);
      if (pos != fields[*z_idx].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError("row " + std::to_string(row) + ": unparseable numeric '" +
                      fields[*z_idx] + "' in column " + cfg.z_column);
    }
    for (const auto& [name, idx] : covariate_cols) {
      const std::string& v = fields[idx];
      if (v.empty()) continue;
      try {
        std::size_t pos = 0;
        const double value = std::stod(v, &pos);
        if (pos == v.size()) c.covariates[name] = value;
      } catch (const std::exception&) {
        // non-numeric auto-detected column: skip silently only in auto mode
        if (!cfg.covariate_columns.empty())
          throw DataError("row " + std::to_string(row) + ": unparseable numeric '" + v +
                          "' in column " + name);
      }
    }
    if (class_idx && !fields[*class_idx].empty()) c.class_label = fields[*class_idx];
    cases.push_back(std::move(c));
  }
  return validate_dataset(Dataset(std::move(cases)));
}

std::map<std::string, std::vector<std::string>> load_gene_sets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open set file: " + path);
  std::map<std::string, std::vector<std::string>> sets;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    ++row;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("set file line " + std::to_string(row) + ": expected NAME<TAB>ids");
    const std::string name = line.substr(0, tab);
    std::vector<std::string> ids = split_line(line.substr(tab + 1), ',');
    for (auto& id : ids) {
      // trim surrounding spaces
      const auto b = id.find_first_not_of(" \t");
      const auto e = id.find_last_not_of(" \t");
      id = b == std::string::npos ? std::string{} : id.substr(b, e - b + 1);
    }
    std::erase_if(ids, [](const std::string& s) { return s.empty(); });
    if (name.empty() || ids.empty())
      throw DataError("set file line " + std::to_string(row) + ": empty name or id list");
    sets[name] = std::move(ids);
  }
  return sets;
}

Dataset apply_set_labels(Dataset ds, const std::vector<std::string>& ids,
                         const std::string& label) {
  std::vector<Case> cases = ds.cases();
  std::size_t matched = 0;
  for (auto& c : cases) {
    if (std::find(ids.begin(), ids.end(), c.id) != ids.end()) {
      c.class_label = label;
      ++matched;
    } else {
      c.class_label = "rest";
    }
  }
  if (matched == 0) throw DataError("set '" + label + "': no ids matched the dataset");
  return Dataset(std::move(cases));
}

Dataset adjust_z_local(const Dataset& ds, const std::string& covariate, std::size_t window) {
  if (window < 20) throw DataError("adjust_z_local: window must be >= 20");
  if (window > ds.size()) throw DataError("adjust_z_local: window exceeds dataset size");

  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = ds.covariate(i, covariate);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<Case> adjusted = ds.cases();
  std::vector<double> window_z(window);
  for (std::size_t pos = 0; pos < n; ++pos) {
    // contiguous window in covariate order closest to this case
    std::size_t lo = pos >= window / 2 ? pos - window / 2 : 0;
    lo = std::min(lo, n - window);
    // slide for the tightest covariate span containing pos
    while (lo + window - 1 < n - 1 && lo < pos &&
           x[order[lo + window]] - x[order[pos]] < x[order[pos]] - x[order[lo]]) {
      ++lo;
    }
    while (lo > 0 && lo + window - 1 > pos &&
           x[order[pos]] - x[order[lo - 1]] < x[order[lo + window - 1]] - x[order[pos]]) {
      --lo;
    }
    // window statistics come from the original z's, not partially adjusted ones
    for (std::size_t k = 0; k < window; ++k) window_z[k] = ds.at(order[lo + k]).z;
    std::vector<double> copy = window_z;
    const double med = median(copy);
    const double spread = quantile(copy, 0.84) - quantile(copy, 0.16);
    if (!(spread > 0.0)) throw FitError("adjust_z_local: zero local spread");
    Case& c = adjusted[order[pos]];
    c.covariates["z_raw"] = c.z;
    c.z = (c.z - med) / (spread / 2.0);
  }
  // order-preserving: adjusted[i] corresponds to ds case i
  return Dataset(std::move(adjusted));
}

void Table::add_numeric(const std::string& name, std::vector<double> values) {
  if (rows == 0) rows = values.size();
  if (values.size() != rows) throw DataError("table column size mismatch: " + name);
  columns.push_back(name);
  numeric.push_back(std::move(values));
  text.emplace_back();
}

void Table::add_text(const std::string& name, std::vector<std::string> values) {
  if (rows == 0) rows = values.size();
  if (values.size() != rows) throw DataError("table column size mismatch: " + name);
  columns.push_back(name);
  numeric.emplace_back();
  text.push_back(std::move(values));
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path);
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  char buf[64];
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ",";
      if (!table.numeric[c].empty()) {
        std::snprintf(buf, sizeof(buf), "%.17g", table.numeric[c][r]);
        out << buf;
      } else {
        out << table.text[c][r];
      }
    }
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_manifest(const std::string& path, const AnalysisConfig& cfg,
                    const std::map<std::string, std::string>& diagnostics) {
  json j;
  j["version"] = library_version();
  j["config"] = config_to_json(cfg);
  j["diagnostics"] = diagnostics;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

AnalysisConfig read_manifest_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  json j;
  in >> j;
  if (!j.contains("config")) throw DataError("manifest has no config block");
  return config_from_json(j["config"]);
}

}  // namespace covfdr
