#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"

namespace covfdr {

enum class Direction { left, right, two_sided };

// min(1, p0 f0 / f) and its tail analogue.
double local_fdr_value(double p0, double f0, double f);
double tail_fdr_value(double p0, double big_f0, double big_f);

struct FdrCurve {
  std::vector<double> grid;
  std::vector<double> fdr;       // local fdr, capped at 1
  std::vector<double> fdr_raw;   // uncapped ratio p0 f0 / f̂
  std::vector<double> fdr_left;  // tail Fdr for {z_i <= z}, capped at 1
  std::vector<double> fdr_right; // tail Fdr for {z_i >= z}, capped at 1
  std::vector<double> f;         // fitted mixture density on the grid
  std::vector<double> f0;        // null density on the grid
  NullEstimate null_estimate;
  std::shared_ptr<const DensityFit> density;  // set when built from a fit

  // Exact when the density fit is attached, interpolated on the grid otherwise.
  double fdr_at(double z) const;
  double fdr_raw_at(double z) const;
};

// Local fdr and both tail Fdr curves on the given grid (default: bin
// midpoints). Tail values use cumulative sums over the grid so that Fdr is
// exactly the f̂-weighted average of (uncapped) fdr over the tail.
FdrCurve local_fdr_curve(const NullEstimate& ne, const DensityFit& density,
                         std::vector<double> grid);
FdrCurve local_fdr_curve(const NullEstimate& ne, const DensityFit& density);

// Oracle-style construction from precomputed values (no density fit attached).
FdrCurve fdr_curve_from_values(std::vector<double> grid, std::vector<double> f,
                               std::vector<double> f0, double p0,
                               const NullEstimate& ne);

struct RejectionSet {
  enum class Rule { bh, bonferroni, fdr_threshold } rule = Rule::bh;
  Direction direction = Direction::right;
  double level = 0.0;        // q or alpha
  double threshold_z = std::numeric_limits<double>::quiet_NaN();
  double threshold_p = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> rejected_indices;
  std::vector<std::string> rejected_ids;

  std::size_t size() const { return rejected_indices.size(); }
};

// Benjamini-Hochberg on z-derived p-values: the extreme threshold z with
// p0 F0(z)/F̄(z) <= q in the stated direction. p0 is taken from the null
// estimate (1 for the theoretical null).
RejectionSet bh_reject(const Dataset& ds, const NullEstimate& ne, double q,
                       Direction dir = Direction::right);
RejectionSet bh_reject(std::span<const double> z, const NullEstimate& ne, double q,
                       Direction dir = Direction::right);

RejectionSet bonferroni_reject(std::span<const double> pvalues, double alpha);

// Realized false discovery proportion; 0 when nothing is rejected.
double false_discovery_proportion(const RejectionSet& rs, const Dataset& ds);

struct AccuracyReport {
  double z = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  double f_z = 0.0;      // mixture c.d.f. at z
  double e_z = 0.0;      // N * F(z), expected tail count
  double d = 0.0;
  double c = 0.0;
  double mean_d = 0.0;   // E{D}, D = Fdr-bar / Fdr
  double var_d = 0.0;
  double cv = 0.0;             // refined coefficient of variation
  double cv_first_order = 0.0; // sqrt(d)
};

AccuracyReport fdrbar_accuracy(std::size_t n, double f_z,
                               double z = std::numeric_limits<double>::quiet_NaN());

}  // namespace covfdr
