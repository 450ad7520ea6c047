#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covfdr/core.hpp"
#include "covfdr/spline.hpp"

namespace covfdr {

struct BinSpec {
  double lo = -4.2;
  double hi = 4.2;
  int k = 42;

  double width() const { return (hi - lo) / k; }
  double midpoint(int i) const { return lo + (i + 0.5) * width(); }
  std::vector<double> midpoints() const;

  // Default rule: pad the data range by 0.1 on both sides, bins of length
  // about 0.2, never fewer than 42 of them.
  static BinSpec for_range(double z_min, double z_max);
  static BinSpec for_data(std::span<const double> z);
};

struct BinnedCounts {
  BinSpec spec;
  std::vector<double> counts;                        // N_k
  std::optional<std::vector<double>> class_counts;   // N_Ak when a label was given

  double total() const;
  // r_Ak = N_Ak / N_k where N_k > 0, NaN elsewhere.
  std::vector<double> class_proportions() const;
};

BinnedCounts bin_counts(const Dataset& ds, const BinSpec& spec,
                        const std::optional<std::string>& class_label = {});
BinnedCounts bin_counts(std::span<const double> z, const BinSpec& spec,
                        std::span<const std::uint8_t> in_class = {});

enum class DensityBasisKind { natural_spline, polynomial };

struct DensityFitConfig {
  DensityBasisKind basis = DensityBasisKind::natural_spline;
  int df = 7;
  double tol = 1e-8;
  int max_iter = 100;
};

// Poisson-GLM estimate of the mixture density f(z) on binned counts,
// normalized so the bin-midpoint Riemann sum is exactly one.
class DensityFit {
 public:
  double operator()(double z) const { return density(z); }
  double density(double z) const;
  double log_density(double z) const;
  // c.d.f. by cumulative sums over bins, piecewise linear within a bin.
  double cdf(double z) const;
  // Delta-method sd of log f̂(z); the total-count direction is projected out.
  double sd_log_density(double z) const;

  const BinSpec& spec() const { return spec_; }
  const Eigen::VectorXd& coefficients() const { return beta_; }
  const std::vector<double>& fitted_counts() const { return fitted_; }
  double total_count() const { return n_total_; }
  int df() const { return df_; }
  DensityBasisKind basis_kind() const { return kind_; }
  int iterations() const { return iterations_; }

  friend DensityFit fit_mixture_density(const BinnedCounts&, const DensityFitConfig&);

 private:
  Eigen::RowVectorXd design_row(double z) const;

  BinSpec spec_;
  DensityBasisKind kind_ = DensityBasisKind::natural_spline;
  int df_ = 7;
  std::shared_ptr<const NaturalSplineBasis> spline_;
  Eigen::VectorXd beta_;
  Eigen::MatrixXd covariance_;
  Eigen::RowVectorXd weighted_mean_row_;  // Σ (μ_k/Σμ) x_k, for the delta method
  std::vector<double> fitted_;            // fitted bin intensities μ_k
  std::vector<double> cum_density_;       // cumulative f̂ mass at bin right edges
  double log_norm_ = 0.0;                 // log(Σ_k exp(η_k) · width)
  double n_total_ = 0.0;
  int iterations_ = 0;
};

DensityFit fit_mixture_density(const BinnedCounts& bc, const DensityFitConfig& cfg = {});
DensityFit fit_mixture_density(const BinnedCounts& bc, int df);

struct NullEstimate {
  double delta0 = 0.0;
  double sigma0 = 1.0;
  double p0 = 1.0;
  enum class Source { theoretical, empirical_mle } source = Source::theoretical;

  static NullEstimate theoretical() { return {}; }
};

struct EmpiricalNullConfig {
  // Central window = this fraction of the sample, symmetric in quantiles.
  double central_fraction = 0.85;
  double tol = 1e-9;
  int max_iter = 2000;
  std::size_t min_cases = 200;
};

// Truncated-normal maximum likelihood for (δ0, σ0, p0) on the central window,
// counts outside treated as censored mass.
NullEstimate fit_empirical_null(std::span<const double> z, const EmpiricalNullConfig& cfg = {});
NullEstimate fit_empirical_null(const Dataset& ds, const EmpiricalNullConfig& cfg = {});

struct NullDensityValue {
  double f0;     // density
  double big_f0; // c.d.f.
};

NullDensityValue null_density_eval(const NullEstimate& ne, double z);

}  // namespace covfdr
