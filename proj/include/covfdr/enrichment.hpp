#pragma once

#include <map>
#include <optional>
#include <string>

#include "covfdr/core.hpp"
#include "covfdr/fdr.hpp"

namespace covfdr {

struct EnrichmentResult {
  std::string set_label;
  std::size_t n_a = 0;
  double s = 0.0;           // slope z-statistic
  double p_two_sided = 1.0;
  std::optional<double> s_pos, p_pos;  // side-split on {z > 0}
  std::optional<double> s_neg, p_neg;  // side-split on {z < 0}
  bool ridged = false;
  std::map<std::string, double> per_case_fdr_a;  // id -> fdr̂_A(z_i)
  std::size_t n_below_threshold = 0;             // members with fdr̂_A < 0.10
};

// Slope test for enrichment: unbinned linear logistic regression of set
// membership on z; S = slope / se, two-sided normal p-value.
EnrichmentResult enrichment_slope_test(const Dataset& ds, const std::string& set_label,
                                       bool side_split = false);

// Adds per-member fdr̂_A(z_i) = fdr̂(z_i) · π_A / π̂_A(z_i) with the constant
// null class probability π_A0 = π_A, and the count below 0.10.
EnrichmentResult enrichment_fdr_report(const Dataset& ds, const std::string& set_label,
                                       const FdrCurve& fdr,
                                       std::optional<EnrichmentResult> base = {});

}  // namespace covfdr
