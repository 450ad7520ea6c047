#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"
#include "covfdr/fdr.hpp"

namespace covfdr {

enum class LogitBasis { cubic, flat_interval };
enum class FlatSide { positive, negative };

// Weighted binned logistic fit of Prob{A | z}. logit π̂_A(z) is a cubic in z,
// or the flat-interval form: b1 + b2 max(z-1,0)^2 + b3 max(z-1,0)^3
// (mirrored for negative-side analyses).
class ClassProbCurve {
 public:
  double operator()(double z) const { return prob(z); }
  double prob(double z) const;
  double logit(double z) const;
  double logit_slope(double z) const;
  double sd_logit(double z) const;
  double sd_logit_slope(double z) const;
  // se of the average slope of logit π̂_A between two points
  double sd_mean_slope(double z_lo, double z_hi) const;

  LogitBasis basis() const { return basis_; }
  bool ridged() const { return ridged_; }
  bool converged() const { return converged_; }
  const Eigen::VectorXd& coefficients() const { return beta_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  friend ClassProbCurve fit_class_prob_curve(const BinnedCounts&, LogitBasis, FlatSide);

 private:
  Eigen::RowVectorXd basis_row(double z) const;
  Eigen::RowVectorXd basis_slope_row(double z) const;

  LogitBasis basis_ = LogitBasis::cubic;
  FlatSide side_ = FlatSide::positive;
  double z_scale_ = 1.0;  // cubic basis standardization
  Eigen::VectorXd beta_;
  Eigen::MatrixXd covariance_;
  bool ridged_ = false;
  bool converged_ = false;
};

ClassProbCurve fit_class_prob_curve(const BinnedCounts& bc, LogitBasis basis = LogitBasis::cubic,
                                    FlatSide side = FlatSide::positive);

// π_A0(z) = Prob_0{A | z}: constant, parametric from the two class
// nulls, or the plug-in value π̂_A(0).
class NullClassProb {
 public:
  enum class Kind { constant, parametric, plug_in_zero };

  static NullClassProb constant(double pi_a0);
  // shared-null constant: π_A0 = π_A p_A0 / (π_A p_A0 + π_B p_B0)
  static NullClassProb from_rates(double pi_a, double p_a0, double p_b0);
  static NullClassProb parametric(const NullEstimate& null_a, const NullEstimate& null_b,
                                  double pi_a);
  static NullClassProb plug_in_zero(const ClassProbCurve& pa);

  double operator()(double z) const;
  Kind kind() const { return kind_; }

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.5;
  double pi_a_ = 0.5;
  NullEstimate null_a_, null_b_;
};

enum class Correction { none, plug_in_zero, pa0_hat };

struct SubclassFdrReport {
  std::vector<double> grid;
  std::vector<double> fdr_combined;  // capped
  std::vector<double> r_a;           // π̂_A0 / π̂_A (floored denominator)
  std::vector<double> fdr_a;         // min(1, fdr̂ · R̂_A), with any correction applied
  std::vector<double> log_fdr_raw;   // uncapped log fdr̂ (variance accounting)
  std::vector<double> log_r_a;
  std::optional<double> p_a0_hat;    // mean fdr_A over class-A cases, when computed
  std::vector<double> sd_log_fdr;    // delta-method curves, empty if unavailable
  std::vector<double> sd_log_r_a;
  std::vector<double> sd_log_fdr_a;
  bool pi_floor_hit = false;
};

using ZFunction = std::function<double(double)>;

// Theorem route: fdr̂_A(z) = fdr̂(z) · π̂_A0(z)/π̂_A(z). class_a_z is needed for
// the pa0_hat correction and for reporting p̂_A0; it may be empty otherwise.
SubclassFdrReport subclass_fdr_curve(const FdrCurve& fdr, const ClassProbCurve& pa,
                                     const NullClassProb& pa0,
                                     Correction correction = Correction::none,
                                     std::span<const double> class_a_z = {});

// Same computation with arbitrary evaluable curves (oracle checks, custom fits).
SubclassFdrReport subclass_fdr_curve(const FdrCurve& fdr, const ZFunction& pa,
                                     const ZFunction& pa0,
                                     Correction correction = Correction::none,
                                     std::span<const double> class_a_z = {});

struct TailFdrReport {
  std::vector<double> grid;
  Direction direction = Direction::left;
  std::vector<double> fdr_tail;    // combined tail Fdr
  std::vector<double> r_a_tail;    // conditional-on-tail class ratio
  std::vector<double> fdr_a_tail;  // min(1, Fdr · R_A)
};

// Tail analogue: R_A uses probabilities conditional on the tail, i.e. the
// ratio of null-expected A mass to observed (model) A mass in the tail.
TailFdrReport subclass_tail_fdr(const FdrCurve& fdr, const ClassProbCurve& pa,
                                const NullClassProb& pa0, Direction dir = Direction::left);
TailFdrReport subclass_tail_fdr(const FdrCurve& fdr, const ZFunction& pa,
                                const ZFunction& pa0, Direction dir = Direction::left);

struct RelevanceFdrValue {
  double fdr_bar = 0.0;    // combined empirical tail Fdr at z
  double r_bar = 0.0;      // relevance ratio
  double fdr_bar_i = 0.0;  // Fdr-bar(z) * R-bar_i(z)
  std::size_t n_tail = 0;  // cases in the tail
};

// Relevance-weighted tail Fdr for a focal case: numerator weights expected
// null mass by relevance, denominator weights observed tail cases.
RelevanceFdrValue relevance_weighted_fdr(const Dataset& ds, std::size_t focal_index,
                                         const RelevanceFunction& rho, const NullEstimate& ne,
                                         double z, Direction dir = Direction::left);

struct FlatnessReport {
  double max_abs_logit_slope = 0.0;
  double mean_slope = 0.0;     // average slope of logit π̂_A across the window
  double mean_slope_se = 0.0;
  bool flat = false;           // |mean_slope| within 2 se of 0
  double window_lo = -1.0;
  double window_hi = 1.0;
};

// Diagnostic for shared class nulls: a non-flat logit π̂_A near z = 0 is
// evidence against f_A0 = f_B0.
FlatnessReport null_flatness_diagnostic(const ClassProbCurve& pa, double window_lo = -1.0,
                                        double window_hi = 1.0);

struct SdCurves {
  std::vector<double> sd_log_fdr;
  std::vector<double> sd_log_r_a;
  std::vector<double> sd_log_fdr_a;
};

// Delta-method standard deviations: Poisson-GLM part for log fdr̂ (null
// parameters treated as fixed) and logistic part for log R̂_A, combined in
// quadrature.
SdCurves sd_log_fdr_a(const DensityFit& density, const ClassProbCurve& pa,
                      std::span<const double> grid);

}  // namespace covfdr
