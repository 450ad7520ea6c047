#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"
#include "covfdr/fdr.hpp"
#include "covfdr/stats.hpp"

using namespace covfdr;

namespace {

// oracle mixture 0.9 N(0,1) + 0.1 N(2.5,1) with p0 = 0.9
FdrCurve oracle_mixture_curve() {
  std::vector<double> grid, f, f0;
  for (double z = -4.0; z <= 6.0 + 1e-9; z += 0.01) {
    grid.push_back(z);
    f0.push_back(norm_pdf(z));
    f.push_back(0.9 * norm_pdf(z) + 0.1 * norm_pdf(z - 2.5));
  }
  NullEstimate ne = NullEstimate::theoretical();
  ne.p0 = 0.9;
  return fdr_curve_from_values(std::move(grid), std::move(f), std::move(f0), 0.9, ne);
}

Dataset dataset_from_z(const std::vector<double>& z) {
  std::vector<Case> cases(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    cases[i].id = "c" + std::to_string(i);
    cases[i].z = z[i];
  }
  return Dataset(std::move(cases));
}

}  // namespace

TEST_CASE("local fdr closed-form values") {
  const double f = 0.9 * norm_pdf(2.5) + 0.1 * norm_pdf(0.0);
  CHECK_NEAR(f, 0.055670, 1e-5);
  CHECK_NEAR(local_fdr_value(0.9, norm_pdf(2.5), f), 0.2834, 2e-4);

  const double tail0 = 1.0 - norm_cdf(2.5);
  const double tail = 0.9 * tail0 + 0.1 * 0.5;
  CHECK_NEAR(tail_fdr_value(0.9, tail0, tail), 0.1005, 2e-4);
}

TEST_CASE("null-only data gives fdr near one in the center") {
  Rng rng(31);
  std::vector<double> z(20000);
  for (auto& v : z) v = rng.normal();
  const BinnedCounts bc = bin_counts(std::span<const double>(z), BinSpec::for_data(z));
  const DensityFit fit = fit_mixture_density(bc, 7);
  const FdrCurve curve = local_fdr_curve(NullEstimate::theoretical(), fit);
  for (double zz = -1.5; zz <= 1.5; zz += 0.25)
    CHECK_NEAR(curve.fdr_at(zz), 1.0, 0.05);
}

TEST_CASE("curve matches the oracle ratio and caps at one") {
  const FdrCurve curve = oracle_mixture_curve();
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    CHECK(curve.fdr[i] > 0.0);
    CHECK(curve.fdr[i] <= 1.0);
    CHECK(curve.fdr[i] == doctest::Approx(std::min(1.0, curve.fdr_raw[i])));
  }
  // right-tail Fdr value at 2.5 from the curve's cumulative sums
  auto it = std::lower_bound(curve.grid.begin(), curve.grid.end(), 2.5 - 1e-9);
  const std::size_t i25 = static_cast<std::size_t>(it - curve.grid.begin());
  // grid-cumulative tails approach the continuous value as the step shrinks
  CHECK_NEAR(curve.fdr_right[i25], 0.1005, 2e-3);
}

TEST_CASE("tail Fdr is the density-weighted average of local fdr over the tail") {
  const FdrCurve curve = oracle_mixture_curve();
  for (std::size_t m : {10UL, 50UL, 120UL, curve.grid.size() - 1}) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      num += curve.fdr_raw[j] * curve.f[j];
      den += curve.f[j];
    }
    CHECK(curve.fdr_left[m] == doctest::Approx(std::min(1.0, num / den)).epsilon(1e-12));
  }
}

TEST_CASE("bh_reject matches the step-up oracle on a 4-value example") {
  // p-values 0.001, 0.02, 0.03, 0.5 at q = 0.1: thresholds iq/N, reject first 3
  std::vector<double> p = {0.001, 0.02, 0.03, 0.5};
  std::vector<double> z(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) z[i] = norm_quantile(p[i]);
  const RejectionSet rs = bh_reject(z, NullEstimate::theoretical(), 0.1, Direction::left);
  CHECK(rs.rejected_indices == std::vector<std::size_t>{0, 1, 2});
  CHECK(rs.threshold_p == doctest::Approx(0.03));

  // all p-values 1 -> reject none
  std::vector<double> z_high(4, 40.0);
  const RejectionSet none = bh_reject(z_high, NullEstimate::theoretical(), 0.1, Direction::left);
  CHECK(none.size() == 0);
  CHECK(std::isnan(none.threshold_z));
}

TEST_CASE("bh rejection set is monotone in q") {
  Rng rng(77);
  std::vector<double> z(500);
  for (auto& v : z) v = rng.normal() + (rng.uniform() < 0.05 ? 2.5 : 0.0);
  std::size_t prev = 0;
  for (double q : {0.01, 0.05, 0.1, 0.2, 0.4}) {
    const RejectionSet rs = bh_reject(z, NullEstimate::theoretical(), q, Direction::right);
    CHECK(rs.size() >= prev);
    prev = rs.size();
  }
}

TEST_CASE("two-sided bh folds around the null mean") {
  std::vector<double> z = {-8.0, 8.0, 0.1, -0.2};
  const RejectionSet rs = bh_reject(z, NullEstimate::theoretical(), 0.1, Direction::two_sided);
  CHECK(rs.size() == 2);
  CHECK(std::find(rs.rejected_indices.begin(), rs.rejected_indices.end(), 0) !=
        rs.rejected_indices.end());
  CHECK(std::find(rs.rejected_indices.begin(), rs.rejected_indices.end(), 1) !=
        rs.rejected_indices.end());
}

TEST_CASE("bonferroni thresholds") {
  std::vector<double> p = {0.0004, 0.0006, 0.1};
  // N = 100 with 97 filler values
  std::vector<double> padded = p;
  padded.resize(100, 0.9);
  const RejectionSet rs = bonferroni_reject(padded, 0.05);
  CHECK(rs.threshold_p == doctest::Approx(0.0005));
  CHECK(rs.rejected_indices == std::vector<std::size_t>{0});

  // N = 1 reduces to a level-alpha single test
  const RejectionSet single = bonferroni_reject(std::vector<double>{0.04}, 0.05);
  CHECK(single.size() == 1);

  // splitting in half doubles the per-test threshold
  const RejectionSet half = bonferroni_reject(std::vector<double>(50, 1.0), 0.05);
  CHECK(half.threshold_p == doctest::Approx(2.0 * rs.threshold_p));
}

TEST_CASE("false discovery proportion bookkeeping") {
  std::vector<Case> cases(3);
  cases[0] = {"a", 3.0, {}, {}, true};
  cases[1] = {"b", 3.5, {}, {}, false};
  cases[2] = {"c", 4.0, {}, {}, false};
  const Dataset ds(std::move(cases));
  RejectionSet rs;
  rs.rejected_indices = {0, 1, 2};
  CHECK(false_discovery_proportion(rs, ds) == doctest::Approx(1.0 / 3.0));

  RejectionSet empty;
  CHECK(false_discovery_proportion(empty, ds) == 0.0);

  std::vector<Case> untagged(1);
  untagged[0] = {"u", 1.0, {}, {}, {}};
  RejectionSet one;
  one.rejected_indices = {0};
  CHECK_THROWS_WITH_AS(false_discovery_proportion(one, Dataset(untagged)),
                       doctest::Contains("truth"), DataError);
}

TEST_CASE("fdrbar accuracy formulas at a small expected tail count") {
  const AccuracyReport rep = fdrbar_accuracy(1000, 0.01);
  CHECK(rep.e_z == doctest::Approx(10.0));
  CHECK_NEAR(rep.cv_first_order, 0.3147, 5e-4);
  CHECK_NEAR(rep.c, 0.98990, 1e-5);
  CHECK_NEAR(rep.cv, 0.238, 1e-3);

  // d -> 0 asymptotics
  const AccuracyReport big = fdrbar_accuracy(100000000, 0.01);
  CHECK_NEAR(big.d, 0.0, 1e-3);
  CHECK_NEAR(big.mean_d, 1.0, 1e-3);
  CHECK_NEAR(big.cv, 0.0, 0.01);

  CHECK_THROWS_AS(fdrbar_accuracy(1000, 0.0), DataError);
  CHECK_THROWS_AS(fdrbar_accuracy(1000, 1.0), DataError);
}

TEST_CASE("bh on datasets keeps ids aligned") {
  const Dataset ds = dataset_from_z({5.0, 0.0, 4.8});
  const RejectionSet rs = bh_reject(ds, NullEstimate::theoretical(), 0.1, Direction::right);
  CHECK(rs.rejected_ids.size() == rs.rejected_indices.size());
  for (std::size_t k = 0; k < rs.size(); ++k)
    CHECK(ds.at(rs.rejected_indices[k]).id == rs.rejected_ids[k]);
}
