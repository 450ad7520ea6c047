#include "covfdr/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "covfdr/stats.hpp"

namespace covfdr {

Dataset simulate_two_class(const TwoClassSimConfig& cfg) {
  if (cfg.n == 0) throw DataError("simulate_two_class: N must be >= 1");
  if (cfg.pi_a < 0.0 || cfg.pi_a > 1.0) throw DataError("simulate_two_class: pi_a outside [0,1]");
  for (double p : {cfg.p_a0, cfg.p_b0})
    if (p < 0.0 || p > 1.0) throw DataError("simulate_two_class: null rate outside [0,1]");
  if (cfg.p_a0 < 1.0 && cfg.pi_a > 0.0 && !cfg.alt_a)
    throw DataError("simulate_two_class: p_a0 < 1 requires alt_a");
  if (cfg.p_b0 < 1.0 && cfg.pi_a < 1.0 && !cfg.alt_b)
    throw DataError("simulate_two_class: p_b0 < 1 requires alt_b");

  Rng rng(cfg.seed);
  std::vector<Case> cases;
  cases.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Case c;
    c.id = "sim-" + std::to_string(i + 1);
    const bool in_a = rng.uniform() < cfg.pi_a;
    c.class_label = in_a ? "A" : "B";
    const double p_null = in_a ? cfg.p_a0 : cfg.p_b0;
    const bool is_null = rng.uniform() < p_null;
    c.is_null_truth = is_null;
    const NormalParams& params =
        is_null ? (in_a ? cfg.null_a : cfg.null_b) : (in_a ? *cfg.alt_a : *cfg.alt_b);
    c.z = rng.normal(params.mean, params.sd);
    cases.push_back(std::move(c));
  }
  return Dataset(std::move(cases));
}

namespace {

double normal_pdf_at(const NormalParams& p, double z) {
  const double s = (z - p.mean) / p.sd;
  return norm_pdf(s) / p.sd;
}

double normal_cdf_at(const NormalParams& p, double z) {
  return norm_cdf((z - p.mean) / p.sd);
}

}  // namespace

TwoClassOracle::TwoClassOracle(const TwoClassSimConfig& cfg) : cfg_(cfg) {
  p0_ = cfg.pi_a * cfg.p_a0 + (1.0 - cfg.pi_a) * cfg.p_b0;
}

double TwoClassOracle::f_a(double z) const {
  double v = cfg_.p_a0 * normal_pdf_at(cfg_.null_a, z);
  if (cfg_.p_a0 < 1.0) v += (1.0 - cfg_.p_a0) * normal_pdf_at(*cfg_.alt_a, z);
  return v;
}

double TwoClassOracle::f_b(double z) const {
  double v = cfg_.p_b0 * normal_pdf_at(cfg_.null_b, z);
  if (cfg_.p_b0 < 1.0) v += (1.0 - cfg_.p_b0) * normal_pdf_at(*cfg_.alt_b, z);
  return v;
}

double TwoClassOracle::f0(double z) const {
  const double pa = cfg_.pi_a, pb = 1.0 - cfg_.pi_a;
  return (pa * cfg_.p_a0 * normal_pdf_at(cfg_.null_a, z) +
          pb * cfg_.p_b0 * normal_pdf_at(cfg_.null_b, z)) /
         p0_;
}

double TwoClassOracle::f(double z) const {
  return cfg_.pi_a * f_a(z) + (1.0 - cfg_.pi_a) * f_b(z);
}

double TwoClassOracle::fdr(double z) const { return p0_ * f0(z) / f(z); }

double TwoClassOracle::fdr_a(double z) const {
  return cfg_.p_a0 * normal_pdf_at(cfg_.null_a, z) / f_a(z);
}

double TwoClassOracle::fdr_b(double z) const {
  return cfg_.p_b0 * normal_pdf_at(cfg_.null_b, z) / f_b(z);
}

double TwoClassOracle::pi_a_given_z(double z) const { return cfg_.pi_a * f_a(z) / f(z); }

double TwoClassOracle::pi_a0_given_z(double z) const {
  return cfg_.pi_a * cfg_.p_a0 * normal_pdf_at(cfg_.null_a, z) / (p0_ * f0(z));
}

double TwoClassOracle::fdr_a_uncorrected(double z) const {
  return std::min(1.0, fdr(z) * cfg_.pi_a / pi_a_given_z(z));
}

double TwoClassOracle::big_f_a(double z) const {
  double v = cfg_.p_a0 * normal_cdf_at(cfg_.null_a, z);
  if (cfg_.p_a0 < 1.0) v += (1.0 - cfg_.p_a0) * normal_cdf_at(*cfg_.alt_a, z);
  return v;
}

double TwoClassOracle::big_f_b(double z) const {
  double v = cfg_.p_b0 * normal_cdf_at(cfg_.null_b, z);
  if (cfg_.p_b0 < 1.0) v += (1.0 - cfg_.p_b0) * normal_cdf_at(*cfg_.alt_b, z);
  return v;
}

double TwoClassOracle::big_f0(double z) const {
  const double pa = cfg_.pi_a, pb = 1.0 - cfg_.pi_a;
  return (pa * cfg_.p_a0 * normal_cdf_at(cfg_.null_a, z) +
          pb * cfg_.p_b0 * normal_cdf_at(cfg_.null_b, z)) /
         p0_;
}

double TwoClassOracle::big_f(double z) const {
  return cfg_.pi_a * big_f_a(z) + (1.0 - cfg_.pi_a) * big_f_b(z);
}

double TwoClassOracle::big_fdr(double z, Direction dir) const {
  if (dir == Direction::left) return p0_ * big_f0(z) / big_f(z);
  return p0_ * (1.0 - big_f0(z)) / (1.0 - big_f(z));
}

double TwoClassOracle::big_fdr_a(double z, Direction dir) const {
  const double null_mass = cfg_.p_a0 * normal_cdf_at(cfg_.null_a, z);
  if (dir == Direction::left) return null_mass / big_f_a(z);
  return (cfg_.p_a0 - null_mass) / (1.0 - big_f_a(z));
}

double TwoClassOracle::big_fdr_b(double z, Direction dir) const {
  const double null_mass = cfg_.p_b0 * normal_cdf_at(cfg_.null_b, z);
  if (dir == Direction::left) return null_mass / big_f_b(z);
  return (cfg_.p_b0 - null_mass) / (1.0 - big_f_b(z));
}

SubclassStudyResult replicate_subclass_study(const TwoClassSimConfig& cfg,
                                             const SubclassStudyConfig& study) {
  if (study.reps < 50) throw DataError("replicate_subclass_study: needs at least 50 reps");

  std::vector<double> grid = study.grid;
  if (grid.empty())
    for (double z = 0.0; z <= 4.0 + 1e-9; z += 0.1) grid.push_back(z);

  const std::size_t m = grid.size();
  SubclassStudyResult result;
  result.grid = grid;

  std::vector<std::vector<double>> log_fdr_reps, log_ra_reps, fdr_a_reps;
  std::vector<double> delta_sd_f_acc(m, 0.0), delta_sd_ra_acc(m, 0.0);

  for (std::size_t r = 0; r < study.reps; ++r) {
    TwoClassSimConfig rep_cfg = cfg;
    rep_cfg.seed = derive_seed(cfg.seed, r);
    try {
      const Dataset ds = simulate_two_class(rep_cfg);
      const ClassPartition part = partition_by_class(ds, "A");
      const BinSpec spec = BinSpec::for_data(ds.z_values());
      const BinnedCounts bc = bin_counts(ds, spec, "A");

      DensityFitConfig dcfg;
      dcfg.basis = study.basis;
      dcfg.df = study.density_df;
      const DensityFit density = fit_mixture_density(bc, dcfg);

      NullEstimate ne;
      if (study.null_mode == SubclassStudyConfig::NullMode::empirical) {
        EmpiricalNullConfig ncfg;
        ncfg.central_fraction = study.null_central_fraction;
        ne = fit_empirical_null(ds, ncfg);
      } else {
        ne = NullEstimate::theoretical();
      }

      const ClassProbCurve pa = fit_class_prob_curve(bc);
      // study exclusion rule: separated or non-converged class fits are
      // recorded as failures, not patched
      if (pa.ridged() || !pa.converged()) throw FitError("class-probability fit separated");

      const FdrCurve fdr = local_fdr_curve(ne, density, grid);
      const NullClassProb pa0 = NullClassProb::constant(part.pi_a);

      std::vector<double> a_z;
      a_z.reserve(part.indices_a.size());
      for (std::size_t idx : part.indices_a) a_z.push_back(ds.at(idx).z);

      const SubclassFdrReport rep =
          subclass_fdr_curve(fdr, pa, pa0, Correction::none, a_z);

      log_fdr_reps.push_back(rep.log_fdr_raw);
      log_ra_reps.push_back(rep.log_r_a);
      fdr_a_reps.push_back(rep.fdr_a);
      if (rep.p_a0_hat) result.pa0_hats.push_back(*rep.p_a0_hat);
      for (std::size_t i = 0; i < m; ++i) {
        delta_sd_f_acc[i] += rep.sd_log_fdr[i];
        delta_sd_ra_acc[i] += rep.sd_log_r_a[i];
      }
    } catch (const std::exception&) {
      ++result.n_failures;
    }
  }

  result.n_reps = log_fdr_reps.size();
  if (result.n_reps < 2) throw FitError("replicate_subclass_study: too many failed replications");

  result.sd_log_fdr.resize(m);
  result.sd_log_r_a.resize(m);
  result.sd_log_fdr_a.resize(m);
  result.mean_fdr_a.resize(m);
  result.mean_delta_sd_log_fdr.resize(m);
  result.mean_delta_sd_log_r_a.resize(m);

  std::vector<double> column(result.n_reps);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < result.n_reps; ++r) column[r] = log_fdr_reps[r][i];
    result.sd_log_fdr[i] = sample_sd(column);
    for (std::size_t r = 0; r < result.n_reps; ++r) column[r] = log_ra_reps[r][i];
    result.sd_log_r_a[i] = sample_sd(column);
    for (std::size_t r = 0; r < result.n_reps; ++r)
      column[r] = log_fdr_reps[r][i] + log_ra_reps[r][i];
    result.sd_log_fdr_a[i] = sample_sd(column);
    for (std::size_t r = 0; r < result.n_reps; ++r) column[r] = fdr_a_reps[r][i];
    result.mean_fdr_a[i] = mean(column);
    result.mean_delta_sd_log_fdr[i] = delta_sd_f_acc[i] / static_cast<double>(result.n_reps);
    result.mean_delta_sd_log_r_a[i] = delta_sd_ra_acc[i] / static_cast<double>(result.n_reps);
  }

  const TwoClassOracle oracle(cfg);
  result.true_fdr_a.resize(m);
  for (std::size_t i = 0; i < m; ++i) result.true_fdr_a[i] = oracle.fdr_a_uncorrected(grid[i]);

  result.pa0_mean = mean(result.pa0_hats);
  result.pa0_sd = sample_sd(result.pa0_hats);
  return result;
}

PoissonCheckReport poisson_model_checks(const PoissonSimConfig& cfg, std::size_t reps) {
  if (cfg.e0 < 0.0 || cfg.e1 < 0.0 || cfg.e0 + cfg.e1 <= 0.0)
    throw DataError("poisson_model_checks: bad expected counts");
  if (cfg.e0 + cfg.e1 < 10.0)
    throw DataError("poisson_model_checks: e0 + e1 must be at least 10");

  const double e = cfg.e0 + cfg.e1;
  PoissonCheckReport rep;
  rep.fdr = cfg.e0 / e;
  rep.predicted_fdrbar = rep.fdr * (1.0 + 1.0 / e);
  rep.reps = reps;

  Rng rng(cfg.seed);
  auto poisson_draw = [&rng](double lambda) -> std::size_t {
    // Knuth inversion; the region intensities here are modest
    if (lambda <= 0.0) return 0;
    double l = std::exp(-lambda), p = 1.0;
    std::size_t k = 0;
    do {
      ++k;
      p *= rng.uniform();
    } while (p > l);
    return k - 1;
  };

  std::vector<double> fdrbars(reps), fdps(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const std::size_t n0 = poisson_draw(cfg.e0);
    const std::size_t n1 = poisson_draw(cfg.e1);
    const std::size_t n = n0 + n1;
    if (n == 0) {
      ++rep.empty_regions;
      fdrbars[r] = 0.0;
      fdps[r] = 0.0;
      continue;
    }
    fdrbars[r] = cfg.e0 / static_cast<double>(n);
    fdps[r] = static_cast<double>(n0) / static_cast<double>(n);
  }
  rep.mean_fdrbar = mean(fdrbars);
  rep.se_fdrbar = sample_sd(fdrbars) / std::sqrt(static_cast<double>(reps));
  rep.mean_fdp = mean(fdps);
  rep.se_fdp = sample_sd(fdps) / std::sqrt(static_cast<double>(reps));
  return rep;
}

namespace {

// threshold z solving E{Fdr-bar_c(z)} ≐ Fdr_c(z)(1 + 1/e_c(z)) = q on the
// right tail; +inf when unattainable (e.g. a pure-null class).
double calibrated_threshold(const TwoClassOracle& oracle, bool class_a, double q,
                            std::size_t n_class) {
  auto expected_fdrbar = [&](double z) {
    const double fdr_tail = class_a ? oracle.big_fdr_a(z, Direction::right)
                                    : oracle.big_fdr_b(z, Direction::right);
    const double tail_mass =
        class_a ? 1.0 - oracle.big_f_a(z) : 1.0 - oracle.big_f_b(z);
    const double e_tail = static_cast<double>(n_class) * tail_mass;
    if (e_tail <= 0.0) return 1.0;
    return fdr_tail * (1.0 + 1.0 / e_tail);
  };
  double lo = -10.0, hi = 10.0;
  if (expected_fdrbar(hi) > q) return std::numeric_limits<double>::infinity();
  if (expected_fdrbar(lo) <= q) return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_fdrbar(mid) <= q)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

ControlCheckReport combined_control_check(const TwoClassSimConfig& cfg, double q,
                                          std::size_t reps, ControlRule rule) {
  if (!(q > 0.0 && q < 1.0)) throw DataError("combined_control_check: q outside (0,1)");

  ControlCheckReport report;
  report.q = q;
  report.rule = rule;
  report.reps = reps;

  const TwoClassOracle oracle(cfg);
  double thr_a = 0.0, thr_b = 0.0;
  if (rule == ControlRule::calibrated_threshold) {
    const double expect_a = static_cast<double>(cfg.n) * cfg.pi_a;
    const double expect_b = static_cast<double>(cfg.n) * (1.0 - cfg.pi_a);
    thr_a = calibrated_threshold(oracle, true, q, static_cast<std::size_t>(expect_a));
    thr_b = calibrated_threshold(oracle, false, q, static_cast<std::size_t>(expect_b));
    report.threshold_a = thr_a;
    report.threshold_b = thr_b;
  }

  const NullEstimate theoretical = NullEstimate::theoretical();
  std::vector<double> fdps(reps);
  double total_rejections = 0.0;

  for (std::size_t r = 0; r < reps; ++r) {
    TwoClassSimConfig rep_cfg = cfg;
    rep_cfg.seed = derive_seed(cfg.seed, r);
    const Dataset ds = simulate_two_class(rep_cfg);

    std::size_t false_rej = 0, total_rej = 0;
    for (const std::string label : {"A", "B"}) {
      std::vector<double> z;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (*ds.at(i).class_label == label) {
          z.push_back(ds.at(i).z);
          idx.push_back(i);
        }
      }
      if (z.empty()) continue;
      if (rule == ControlRule::per_class_bh) {
        const RejectionSet rs = bh_reject(z, theoretical, q, Direction::right);
        for (std::size_t k : rs.rejected_indices) {
          ++total_rej;
          if (*ds.at(idx[k]).is_null_truth) ++false_rej;
        }
      } else {
        const double thr = label == std::string("A") ? thr_a : thr_b;
        for (std::size_t k = 0; k < z.size(); ++k) {
          if (z[k] >= thr) {
            ++total_rej;
            if (*ds.at(idx[k]).is_null_truth) ++false_rej;
          }
        }
      }
    }
    fdps[r] = total_rej == 0
                  ? 0.0
                  : static_cast<double>(false_rej) / static_cast<double>(total_rej);
    total_rejections += static_cast<double>(total_rej);
    if (total_rej > 0) ++report.reps_with_rejections;
  }

  report.mean_fdp_comb = mean(fdps);
  report.mc_se = sample_sd(fdps) / std::sqrt(static_cast<double>(reps));
  report.mean_rejections = total_rejections / static_cast<double>(reps);
  return report;
}

JensenReport jensen_information_check(const TwoClassOracle& oracle, QLoss loss,
                                      std::span<const double> grid) {
  auto q_of = [loss](double p) {
    p = std::clamp(p, 1e-300, 1.0 - 1e-15);
    if (loss == QLoss::variance) return p * (1.0 - p);
    return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
  };

  JensenReport rep;
  rep.n_points = grid.size();
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (double z : grid) {
    const double pi_az = oracle.pi_a_given_z(z);
    const double lhs = q_of(oracle.fdr(z));
    const double rhs = pi_az * q_of(oracle.fdr_a(z)) + (1.0 - pi_az) * q_of(oracle.fdr_b(z));
    rep.min_margin = std::min(rep.min_margin, lhs - rhs);
  }
  rep.holds = rep.min_margin >= -1e-12;
  return rep;
}

}  // namespace covfdr
