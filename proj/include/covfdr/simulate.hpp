#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"
#include "covfdr/fdr.hpp"
#include "covfdr/separate.hpp"

namespace covfdr {

struct NormalParams {
  double mean = 0.0;
  double sd = 1.0;
};

struct TwoClassSimConfig {
  std::size_t n = 5000;
  double pi_a = 0.01;
  double p_a0 = 0.5;
  double p_b0 = 1.0;
  NormalParams null_a{0.0, 1.0};
  NormalParams null_b{0.0, 1.0};
  std::optional<NormalParams> alt_a = NormalParams{2.5, 1.0};
  std::optional<NormalParams> alt_b{};
  std::uint64_t seed = 1;
};

// Draws a labeled dataset from the two-class tree: class A with probability
// pi_a, then null with the class's null rate. Deterministic given the seed.
Dataset simulate_two_class(const TwoClassSimConfig& cfg);

// Closed-form quantities of the two-class model, for oracle checks and truth
// curves. All tails are left tails unless stated otherwise.
class TwoClassOracle {
 public:
  explicit TwoClassOracle(const TwoClassSimConfig& cfg);

  double p0() const { return p0_; }
  double pi_a() const { return cfg_.pi_a; }
  double p_a0() const { return cfg_.p_a0; }
  double p_b0() const { return cfg_.p_b0; }

  double f_a(double z) const;
  double f_b(double z) const;
  double f0(double z) const;   // combined null density
  double f(double z) const;    // mixture density
  double fdr(double z) const;
  double fdr_a(double z) const;
  double fdr_b(double z) const;
  double pi_a_given_z(double z) const;
  double pi_a0_given_z(double z) const;

  // The uncorrected estimand fdr(z) · π_A / π_A(z), capped at one (no
  // p_A0/p0 factor) — what the constant-π_A0 plug-in estimator targets.
  double fdr_a_uncorrected(double z) const;

  double big_f_a(double z) const;
  double big_f_b(double z) const;
  double big_f0(double z) const;
  double big_f(double z) const;
  double big_fdr(double z, Direction dir = Direction::left) const;
  double big_fdr_a(double z, Direction dir = Direction::left) const;
  double big_fdr_b(double z, Direction dir = Direction::left) const;

  const TwoClassSimConfig& config() const { return cfg_; }

 private:
  TwoClassSimConfig cfg_;
  double p0_;
};

struct SubclassStudyConfig {
  std::size_t reps = 100;
  std::vector<double> grid;  // default: 0 to 4 in steps of 0.1
  enum class NullMode { empirical, theoretical } null_mode = NullMode::empirical;
  // Narrower window than the fit_empirical_null default: keeps the window
  // clear of the alternative and leaves genuine extrapolation variance in
  // the study's log fdr̂ spread.
  double null_central_fraction = 0.70;
  int density_df = 7;
  DensityBasisKind basis = DensityBasisKind::natural_spline;
};

struct SubclassStudyResult {
  std::vector<double> grid;
  // empirical (across replications) sds of the uncapped logs
  std::vector<double> sd_log_fdr;
  std::vector<double> sd_log_r_a;
  std::vector<double> sd_log_fdr_a;
  std::vector<double> mean_fdr_a;   // capped estimates averaged per grid point
  std::vector<double> true_fdr_a;   // oracle curve for the uncorrected estimand
  // per-rep delta-method curves averaged over replications
  std::vector<double> mean_delta_sd_log_fdr;
  std::vector<double> mean_delta_sd_log_r_a;
  std::vector<double> pa0_hats;     // per-replication p_A0 moment estimates
  double pa0_mean = 0.0;
  double pa0_sd = 0.0;
  std::size_t n_reps = 0;
  std::size_t n_failures = 0;       // excluded fits (separation/non-convergence)
};

SubclassStudyResult replicate_subclass_study(const TwoClassSimConfig& cfg,
                                             const SubclassStudyConfig& study = {});

struct PoissonSimConfig {
  double mu = 1000.0;  // expected total N
  double e0 = 10.0;    // expected null count in the region
  double e1 = 90.0;    // expected nonnull count in the region
  std::uint64_t seed = 1;
};

struct PoissonCheckReport {
  double fdr = 0.0;               // e0 / (e0 + e1)
  double predicted_fdrbar = 0.0;  // Fdr · (1 + 1/e)
  double mean_fdrbar = 0.0;
  double se_fdrbar = 0.0;
  double mean_fdp = 0.0;
  double se_fdp = 0.0;
  std::size_t reps = 0;
  std::size_t empty_regions = 0;  // replications with N(Z) = 0 (scored as 0)
};

PoissonCheckReport poisson_model_checks(const PoissonSimConfig& cfg, std::size_t reps);

enum class ControlRule { per_class_bh, calibrated_threshold };

struct ControlCheckReport {
  double q = 0.1;
  ControlRule rule = ControlRule::per_class_bh;
  std::size_t reps = 0;
  double mean_fdp_comb = 0.0;
  double mc_se = 0.0;
  double mean_rejections = 0.0;
  std::size_t reps_with_rejections = 0;
  // calibrated rule only; +inf when a class has no attainable threshold
  std::optional<double> threshold_a, threshold_b;
};

// Applies per-class rejection rules at rate q to simulated two-class data and
// reports the combined false discovery proportion. Right-tail rejections.
ControlCheckReport combined_control_check(const TwoClassSimConfig& cfg, double q,
                                          std::size_t reps,
                                          ControlRule rule = ControlRule::per_class_bh);

enum class QLoss { variance, entropy };

struct JensenReport {
  bool holds = false;
  double min_margin = 0.0;  // min over grid of q(fdr) - mixture of q(fdr_class)
  std::size_t n_points = 0;
};

// Information-loss inequality: prediction risk never decreases when the class
// covariate is ignored.
JensenReport jensen_information_check(const TwoClassOracle& oracle, QLoss loss,
                                      std::span<const double> grid);

}  // namespace covfdr
