// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"
#include "covfdr/enrichment.hpp"
#include "covfdr/fdr.hpp"
#include "covfdr/separate.hpp"
#include "covfdr/simulate.hpp"
#include "covfdr/stats.hpp"

using namespace covfdr;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %-28s %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

TwoClassSimConfig model_75(std::uint64_t seed) {
  TwoClassSimConfig cfg;  // library defaults: the reference study model
  cfg.seed = seed;
  return cfg;
}

// 1. Replication study: sd ratio bounds for the class-conditional fdr.
// 2. p_A0 moment estimator: mean and sd across replications.
// 3. Replication band: rep-mean of fdr_A within 0.10 of the oracle curve.
void criteria_1_2_3() {
  SubclassStudyConfig study;
  study.reps = 100;
  const SubclassStudyResult res = replicate_subclass_study(model_75(9), study);

  std::size_t i25 = 0;
  for (std::size_t i = 0; i < res.grid.size(); ++i)
    if (std::fabs(res.grid[i] - 2.5) < std::fabs(res.grid[i25] - 2.5)) i25 = i;
  const double ratio25 = res.sd_log_fdr_a[i25] / res.sd_log_fdr[i25];

  double max_ratio = 0.0, max_band = 0.0;
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    if (res.grid[i] < 1.5 - 1e-9 || res.grid[i] > 3.5 + 1e-9) continue;
    max_ratio = std::max(max_ratio, res.sd_log_fdr_a[i] / res.sd_log_fdr[i]);
    max_band = std::max(max_band, std::fabs(res.mean_fdr_a[i] - res.true_fdr_a[i]));
  }

  const bool pass1 = ratio25 >= 1.2 && ratio25 <= 2.1 && max_ratio < 3.0;
  report(1, "class-fdr sd ratio", pass1,
         fmt("ratio(2.5)=%.3f in [1.2,2.1], max ratio on [1.5,3.5]=%.3f < 3.0 "
             "(reps=%zu, excluded=%zu)",
             ratio25, max_ratio, res.n_reps, res.n_failures));

  const bool pass2 = res.pa0_mean >= 0.50 && res.pa0_mean <= 0.65 && res.pa0_sd >= 0.02 &&
                     res.pa0_sd <= 0.06;
  report(2, "p_A0 moment estimator", pass2,
         fmt("mean=%.4f in [0.50,0.65], sd=%.4f in [0.02,0.06]", res.pa0_mean, res.pa0_sd));

  const bool pass3 = max_band < 0.10;
  report(3, "replicated fdr_A band", pass3,
         fmt("max |mean fdr_A - truth| on [1.5,3.5] = %.4f < 0.10", max_band));
}

// 4. Poisson-model moments of Fdr-bar and Fdp.
void criterion_4() {
  PoissonSimConfig cfg;
  cfg.e0 = 10.0;
  cfg.e1 = 90.0;
  cfg.mu = 1000.0;
  cfg.seed = 4;
  const PoissonCheckReport rep = poisson_model_checks(cfg, 10000);
  const double err_fdrbar = std::fabs(rep.mean_fdrbar - 0.1 * (1.0 + 1.0 / 100.0));
  const double err_fdp = std::fabs(rep.mean_fdp - 0.1);
  const bool pass = err_fdrbar < 3.0 * rep.se_fdrbar && err_fdp < 3.0 * rep.se_fdp;
  report(4, "Poisson lemma", pass,
         fmt("|mean Fdr_bar - 0.101| = %.5f < 3se=%.5f; |mean Fdp - 0.1| = %.5f < 3se=%.5f",
             err_fdrbar, 3.0 * rep.se_fdrbar, err_fdp, 3.0 * rep.se_fdp));
}

// 5. Combined Fdp control under per-class BH at q = 0.1 and q = 0.05.
void criterion_5() {
  bool pass = true;
  std::string detail;
  for (double q : {0.1, 0.05}) {
    const ControlCheckReport rep = combined_control_check(model_75(5), q, 500);
    const bool ok = rep.mean_fdp_comb <= q + 2.0 * rep.mc_se;
    pass = pass && ok;
    detail += fmt("q=%.2f: mean Fdp_comb=%.4f <= %.4f (2 MC se)  ", q, rep.mean_fdp_comb,
                  q + 2.0 * rep.mc_se);
  }
  report(5, "combined Fdp control", pass, detail);
}

// 6. Oracle identity suite, all checks to 1e-12 (or the stated slack).
void criterion_6() {
  const double tol = 1e-12;
  bool pass = true;
  std::string failing;

  TwoClassSimConfig cfg = model_75(0);
  cfg.p_b0 = 0.98;
  cfg.alt_b = NormalParams{-2.0, 1.2};
  cfg.pi_a = 0.3;
  cfg.null_b = NormalParams{-0.29, 1.01};
  cfg.null_a = NormalParams{0.06, 1.09};
  cfg.p_a0 = 0.9;
  const TwoClassOracle oracle(cfg);

  // separation identity, posterior mixture, mixture density, on a grid
  for (double z = -4.0; z <= 4.0 + 1e-9; z += 0.1) {
    const double lhs = oracle.fdr_a(z);
    const double rhs = oracle.fdr(z) * oracle.pi_a0_given_z(z) / oracle.pi_a_given_z(z);
    if (std::fabs(lhs - rhs) > tol) {
      pass = false;
      failing += "theorem ";
      break;
    }
  }
  for (double z = -4.0; z <= 4.0 + 1e-9; z += 0.1) {
    const double pa = oracle.pi_a_given_z(z);
    const double mix = pa * oracle.fdr_a(z) + (1.0 - pa) * oracle.fdr_b(z);
    if (std::fabs(mix - oracle.fdr(z)) > tol) {
      pass = false;
      failing += "posterior-mixture ";
      break;
    }
  }
  for (double z = -4.0; z <= 4.0 + 1e-9; z += 0.1) {
    const double mix = cfg.pi_a * oracle.f_a(z) + (1.0 - cfg.pi_a) * oracle.f_b(z);
    if (std::fabs(mix - oracle.f(z)) > tol) {
      pass = false;
      failing += "mixture-density ";
      break;
    }
  }

  // relevance-indicator equivalence to the class tail Fdr on a 100-case set
  {
    TwoClassSimConfig small = model_75(606);
    small.n = 100;
    small.pi_a = 0.35;
    const Dataset ds = simulate_two_class(small);
    const ClassPartition part = partition_by_class(ds, "A");
    const NullEstimate ne = NullEstimate::theoretical();
    const RelevanceFunction rho = RelevanceFunction::indicator("A");
    const double z = 0.4;
    const RelevanceFdrValue v = relevance_weighted_fdr(ds, part.indices_a.front(), rho, ne, z);
    // direct class-wise empirical Fdr-bar_A = N_A p0 F0(z) / N_A(z)
    std::size_t n_a_tail = 0;
    for (std::size_t i : part.indices_a)
      if (ds.at(i).z <= z) ++n_a_tail;
    const double direct = static_cast<double>(part.indices_a.size()) *
                          null_density_eval(ne, z).big_f0 / static_cast<double>(n_a_tail);
    if (std::fabs(v.fdr_bar_i - direct) > 1e-12 * std::max(1.0, direct)) {
      pass = false;
      failing += "relevance-indicator ";
    }
  }

  // Bayesian separation property on a discrete-x oracle
  {
    std::vector<TwoClassOracle> groups;
    std::vector<double> weights = {0.2, 0.5, 0.3};
    TwoClassSimConfig g1 = cfg;
    TwoClassSimConfig g2 = model_75(0);
    g2.pi_a = 0.5;
    TwoClassSimConfig g3 = model_75(0);
    g3.pi_a = 0.02;
    g3.p_a0 = 0.7;
    for (const auto& c : {g1, g2, g3}) groups.emplace_back(c);

    const double q = 0.1;
    std::vector<double> thresholds;
    for (const auto& g : groups) {
      // solve Fdr_x(z(x)) = q on the left tail by bisection
      double lo = -12.0, hi = 3.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g.big_fdr(mid, Direction::left) <= q)
          lo = mid;
        else
          hi = mid;
      }
      thresholds.push_back(lo);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const double mass = groups[i].big_f(thresholds[i]);
      num += weights[i] * groups[i].big_fdr(thresholds[i], Direction::left) * mass;
      den += weights[i] * mass;
    }
    if (std::fabs(num / den - q) > 1e-10) {
      pass = false;
      failing += "separation-property ";
    }
  }

  // pooled-tail chain: combined Fdr bounded by q when both classes are
  {
    const TwoClassOracle o75(model_75(0));
    const double q = 0.1;
    // choose right-tail thresholds with class Fdr <= q; B is pure null so its
    // threshold is effectively infinite (no B mass): use class A at two points
    for (double za : {2.8, 3.2}) {
      const double fdr_a = o75.big_fdr_a(za, Direction::right);
      if (fdr_a > q) continue;
      const double e_a0 = 0.01 * 0.5 * (1.0 - norm_cdf(za));
      const double e_a = 0.01 * (1.0 - o75.big_f_a(za));
      const double comb = e_a0 / e_a;  // only class A rejects
      if (comb > q + 1e-12) {
        pass = false;
        failing += "pooled-tail-chain ";
      }
      // two-class version with an active B class
      TwoClassSimConfig cb = model_75(0);
      cb.p_b0 = 0.9;
      cb.alt_b = NormalParams{3.0, 1.0};
      const TwoClassOracle ob(cb);
      double zb_lo = 0.0, zb_hi = 10.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (zb_lo + zb_hi);
        if (ob.big_fdr_b(mid, Direction::right) <= q)
          zb_hi = mid;
        else
          zb_lo = mid;
      }
      const double zb = zb_hi;
      const double fa = ob.big_fdr_a(za, Direction::right);
      const double fb = ob.big_fdr_b(zb, Direction::right);
      const double ea = cb.pi_a * (1.0 - ob.big_f_a(za));
      const double eb = (1.0 - cb.pi_a) * (1.0 - ob.big_f_b(zb));
      const double fdr_comb = (ea * fa + eb * fb) / (ea + eb);
      if (!(fa <= q + 1e-12 && fb <= q + 1e-9)) continue;
      if (fdr_comb > q + 1e-12) {
        pass = false;
        failing += "pooled-tail-chain-two-class ";
      }
    }
  }

  // information-loss (Jensen) inequality, both loss functions
  {
    std::vector<double> grid;
    for (double z = -4.0; z <= 4.0 + 1e-9; z += 0.1) grid.push_back(z);
    const TwoClassOracle o75(model_75(0));
    for (QLoss loss : {QLoss::variance, QLoss::entropy}) {
      const JensenReport rep = jensen_information_check(o75, loss, grid);
      if (!rep.holds) {
        pass = false;
        failing += "jensen ";
      }
    }
  }

  report(6, "oracle identity suite", pass,
         pass ? "separation identity, mixtures, relevance, pooled-tail chain, Jensen at 1e-12"
              : "failing: " + failing);
}

// 7. BH equals the classical step-up rule on random p-vectors.
void criterion_7() {
  Rng rng(7);
  bool pass = true;
  std::size_t checked = 0;
  for (int rep = 0; rep < 1000 && pass; ++rep) {
    const std::size_t n = 1 + rng.integer(50);
    std::vector<double> p(n);
    for (auto& v : p) v = rng.uniform();
    const double q = std::vector<double>{0.05, 0.1, 0.2}[rng.integer(3)];

    // oracle: sort p, find largest i with p_(i) <= i q / n
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    double threshold = -1.0;
    for (std::size_t i = sorted.size(); i-- > 0;) {
      if (sorted[i] <= (static_cast<double>(i + 1) * q) / static_cast<double>(n)) {
        threshold = sorted[i];
        break;
      }
    }
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < n; ++i)
      if (threshold >= 0.0 && p[i] <= threshold) expected.push_back(i);

    // bh_reject operates on z-values; map p to left-tail z = Phi^-1(p)
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = norm_quantile(std::clamp(p[i], 1e-14, 1.0 - 1e-14));
    const RejectionSet rs = bh_reject(z, NullEstimate::theoretical(), q, Direction::left);
    std::vector<std::size_t> got = rs.rejected_indices;
    std::sort(got.begin(), got.end());
    if (got != expected) pass = false;
    ++checked;
  }
  report(7, "BH step-up equivalence", pass,
         fmt("%zu random p-vectors (N<=50, q in {.05,.1,.2}) matched exactly", checked));
}

// 8. Fdr-bar accuracy moment formulas against simulation.
void criterion_8() {
  const std::size_t n = 5000, reps = 2000;
  const double f_z = 0.01;
  const double z_star = norm_quantile(f_z);
  Rng rng(8);
  std::vector<double> d_values;
  d_values.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.normal() <= z_star) ++count;
    if (count == 0) continue;
    // D = Fdr_bar/Fdr = e(z)/N(z)
    d_values.push_back(static_cast<double>(n) * f_z / static_cast<double>(count));
  }
  const double m = mean(d_values);
  const double sd = sample_sd(d_values);
  const double cv = sd / m;
  const AccuracyReport rep = fdrbar_accuracy(n, f_z);

  const double r_eff = static_cast<double>(d_values.size());
  const double se_mean = sd / std::sqrt(r_eff);
  // moment-based se of the sample sd (D is skewed, normal-theory se is too small)
  double m4 = 0.0;
  for (double v : d_values) m4 += std::pow(v - m, 4);
  m4 /= r_eff;
  const double se_var = std::sqrt((m4 - sd * sd * sd * sd) / r_eff);
  const double se_cv = se_var / (2.0 * sd) / m;
  const bool pass_mean = std::fabs(m - rep.mean_d) < 3.0 * se_mean;
  const bool pass_cv = std::fabs(cv - rep.cv) < 3.0 * se_cv;
  report(8, "Fdr-bar accuracy moments", pass_mean && pass_cv,
         fmt("mean D=%.5f vs %.5f (3se=%.5f); CV=%.5f vs %.5f (3se=%.5f)", m, rep.mean_d,
             3.0 * se_mean, cv, rep.cv, 3.0 * se_cv));
}

// 9. Enrichment slope test null calibration.
void criterion_9() {
  const std::size_t n = 10000, set_size = 40, sims = 1000;
  std::size_t rejections = 0;
  std::vector<double> pvals;
  pvals.reserve(sims);
  for (std::size_t s = 0; s < sims; ++s) {
    Rng rng(derive_seed(9, s));
    std::vector<Case> cases(n);
    for (std::size_t i = 0; i < n; ++i) {
      cases[i].id = "g" + std::to_string(i);
      cases[i].z = rng.normal();
      cases[i].class_label = "rest";
    }
    // draw the set without replacement
    for (std::size_t k = 0; k < set_size; ++k) {
      std::size_t idx;
      do {
        idx = rng.integer(n);
      } while (*cases[idx].class_label == "S");
      cases[idx].class_label = "S";
    }
    const Dataset ds(std::move(cases));
    const EnrichmentResult res = enrichment_slope_test(ds, "S");
    pvals.push_back(res.p_two_sided);
    if (res.p_two_sided < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / static_cast<double>(sims);

  std::sort(pvals.begin(), pvals.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    const double ecdf_hi = static_cast<double>(i + 1) / static_cast<double>(pvals.size());
    const double ecdf_lo = static_cast<double>(i) / static_cast<double>(pvals.size());
    ks = std::max({ks, std::fabs(ecdf_hi - pvals[i]), std::fabs(pvals[i] - ecdf_lo)});
  }
  const bool pass = rate >= 0.03 && rate <= 0.08 && ks < 0.05;
  report(9, "enrichment calibration", pass,
         fmt("rejection rate at p<.05 = %.4f in [.03,.08]; KS = %.4f < .05", rate, ks));
}

// 10. Empirical-null recovery on pure N(0,1) data.
void criterion_10() {
  const std::size_t n = 15000, seeds = 50;
  double sum_abs_delta = 0.0, sum_abs_sigma = 0.0, min_p0 = 1.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(10, s));
    std::vector<double> z(n);
    for (auto& v : z) v = rng.normal();
    const NullEstimate ne = fit_empirical_null(z);
    sum_abs_delta += std::fabs(ne.delta0);
    sum_abs_sigma += std::fabs(ne.sigma0 - 1.0);
    min_p0 = std::min(min_p0, ne.p0);
  }
  const double mean_delta = sum_abs_delta / seeds;
  const double mean_sigma = sum_abs_sigma / seeds;
  const bool pass = mean_delta < 0.02 && mean_sigma < 0.02 && min_p0 >= 0.95;
  report(10, "empirical-null recovery", pass,
         fmt("mean |delta0|=%.4f < .02; mean |sigma0-1|=%.4f < .02; min p0=%.4f >= .95",
             mean_delta, mean_sigma, min_p0));
}

}  // namespace

int main() {
  criteria_1_2_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
