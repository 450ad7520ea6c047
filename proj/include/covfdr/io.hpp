#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covfdr/core.hpp"

namespace covfdr {

struct AnalysisConfig {
  std::string input_path;
  std::string z_column = "z";
  std::vector<std::string> covariate_columns;  // empty: take every numeric column
  std::optional<std::string> class_column;
  std::optional<std::string> set_file;
  std::string null_mode = "empirical";  // "theoretical" | "empirical"
  double q = 0.1;
  std::optional<double> bin_lo, bin_hi;
  std::optional<int> bin_count;
  std::string basis = "cubic";  // logit basis: "cubic" | "flat-interval"
  std::string correction = "none";  // "none" | "plug-in-zero" | "pa0-hat"
  double central_fraction = 0.85;
  int density_df = 7;
  std::string density_basis = "spline";  // "spline" | "polynomial"
  std::uint64_t seed = 1;
  std::string output_dir = ".";

  std::string to_json() const;
  static AnalysisConfig from_json(const std::string& text);

  void validate() const;
};

// CSV/TSV with a header row; delimiter inferred from the header line.
Dataset load_table(const std::string& path, const AnalysisConfig& cfg);

// One set per line: NAME <tab> comma-separated ids.
std::map<std::string, std::vector<std::string>> load_gene_sets(const std::string& path);

// Applies a named gene set as the class label ("set") on matching ids.
Dataset apply_set_labels(Dataset ds, const std::vector<std::string>& ids,
                         const std::string& label);

// Covariate-local z standardization: per case, subtract the local median and divide by
// half the local 84%-16% spread, both over the `window` nearest cases by the
// covariate. The raw z is kept in covariate "z_raw".
Dataset adjust_z_local(const Dataset& ds, const std::string& covariate, std::size_t window);

// Column-oriented CSV writing at 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> numeric;              // per column, or empty
  std::vector<std::vector<std::string>> text;            // per column, or empty
  std::size_t rows = 0;

  void add_numeric(const std::string& name, std::vector<double> values);
  void add_text(const std::string& name, std::vector<std::string> values);
};

void write_csv(const std::string& path, const Table& table);

// Run manifest: config + diagnostics + library version, reloadable.
void write_manifest(const std::string& path, const AnalysisConfig& cfg,
                    const std::map<std::string, std::string>& diagnostics);
AnalysisConfig read_manifest_config(const std::string& path);

std::string library_version();

}  // namespace covfdr
