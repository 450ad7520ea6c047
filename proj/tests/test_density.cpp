#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"
#include "covfdr/stats.hpp"

using namespace covfdr;

namespace {

std::vector<double> normal_draws(std::uint64_t seed, std::size_t n, double mu = 0.0,
                                 double sd = 1.0) {
  Rng rng(seed);
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal(mu, sd);
  return z;
}

BinnedCounts bin_span(const std::vector<double>& z, const BinSpec& spec) {
  return bin_counts(std::span<const double>(z), spec);
}

}  // namespace

TEST_CASE("bin_counts counts exactly") {
  BinSpec spec{-4.2, 4.2, 42};
  std::vector<double> z = {-4.1, 0.1, 0.1};
  const BinnedCounts bc = bin_span(z, spec);
  CHECK(bc.counts[0] == 1.0);
  CHECK(bc.counts[21] == 2.0);  // 0.1 lands in bin floor((0.1+4.2)/0.2) = 21
  CHECK(bc.total() == 3.0);

  std::vector<double> out = {5.0};
  CHECK_THROWS_WITH_AS(bin_span(out, spec), doctest::Contains("z outside range"), DataError);
}

TEST_CASE("default bin spec covers the brain-style range with 0.2 bins") {
  const BinSpec spec = BinSpec::for_range(-4.1, 4.1);
  CHECK(spec.lo == doctest::Approx(-4.2));
  CHECK(spec.hi == doctest::Approx(4.2));
  CHECK(spec.k == 42);
  CHECK(spec.width() == doctest::Approx(0.2));
}

TEST_CASE("class counts recorded when a label is given") {
  std::vector<Case> cases(4);
  for (std::size_t i = 0; i < 4; ++i) {
    cases[i].id = "c" + std::to_string(i);
    cases[i].z = i < 2 ? -1.0 : 1.0;
    cases[i].class_label = i % 2 == 0 ? "A" : "B";
  }
  const BinnedCounts bc = bin_counts(Dataset(std::move(cases)), BinSpec{-2, 2, 10}, std::string("A"));
  REQUIRE(bc.class_counts.has_value());
  double total_a = 0;
  for (double c : *bc.class_counts) total_a += c;
  CHECK(total_a == 2.0);
  const auto r = bc.class_proportions();
  CHECK(r.size() == 10);
}

TEST_CASE("density fit recovers the standard normal within 0.015") {
  const auto z = normal_draws(2024, 10000);
  const auto spec = BinSpec::for_data(z);
  const BinnedCounts bc = bin_span(z, spec);

  for (DensityBasisKind kind : {DensityBasisKind::natural_spline, DensityBasisKind::polynomial}) {
    DensityFitConfig cfg;
    cfg.basis = kind;
    cfg.df = 7;
    const DensityFit fit = fit_mixture_density(bc, cfg);
    double max_err = 0.0;
    for (double zz = -3.0; zz <= 3.0; zz += 0.01)
      max_err = std::max(max_err, std::fabs(fit.density(zz) - norm_pdf(zz)));
    INFO("basis ", kind == DensityBasisKind::natural_spline ? "spline" : "poly",
         " max_err ", max_err);
    CHECK(max_err < 0.015);
  }
}

TEST_CASE("density fit invariants: positivity, unit mass, intercept identity") {
  const auto z = normal_draws(7, 5000, 0.3, 1.2);
  const BinnedCounts bc = bin_span(z, BinSpec::for_data(z));
  const DensityFit fit = fit_mixture_density(bc, 7);

  double riemann = 0.0;
  for (int i = 0; i < fit.spec().k; ++i) {
    const double f = fit.density(fit.spec().midpoint(i));
    CHECK(f > 0.0);
    riemann += f * fit.spec().width();
  }
  CHECK(riemann == doctest::Approx(1.0).epsilon(1e-8));

  double fitted_total = 0.0;
  for (double m : fit.fitted_counts()) fitted_total += m;
  CHECK(fitted_total == doctest::Approx(bc.total()).epsilon(1e-6));

  // cdf is monotone from 0 to 1
  CHECK(fit.cdf(fit.spec().lo) == doctest::Approx(0.0));
  CHECK(fit.cdf(fit.spec().hi) == doctest::Approx(1.0));
  double prev = -1.0;
  for (double zz = fit.spec().lo; zz <= fit.spec().hi; zz += 0.05) {
    const double c = fit.cdf(zz);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("mixture density value at the alternative mode") {
  // 0.9 N(0,1) + 0.1 N(2.5,1): f(2.5) = 0.9 phi(2.5) + 0.1 phi(0) = 0.05567
  Rng rng(99);
  std::vector<double> z(50000);
  for (auto& v : z) v = rng.uniform() < 0.9 ? rng.normal() : rng.normal(2.5, 1.0);
  const BinnedCounts bc = bin_span(z, BinSpec::for_data(z));
  const DensityFit fit = fit_mixture_density(bc, 7);
  CHECK(fit.density(2.5) == doctest::Approx(0.05567).epsilon(0.10));
}

TEST_CASE("degenerate designs are rejected") {
  BinSpec spec{-1.0, 1.0, 20};
  std::vector<double> z(150, 0.55);
  CHECK_THROWS_WITH_AS(fit_mixture_density(bin_span(z, spec), 7),
                       doctest::Contains("degenerate design"), FitError);

  std::vector<double> few(50, 0.0);
  CHECK_THROWS_AS(fit_mixture_density(bin_span(few, spec), 7), DataError);
  CHECK_THROWS_AS(fit_mixture_density(bin_span(z, spec), 1), DataError);
}

TEST_CASE("empirical null recovers pure N(0,1)") {
  const auto z = normal_draws(404, 15000);
  const NullEstimate ne = fit_empirical_null(z);
  CHECK(ne.source == NullEstimate::Source::empirical_mle);
  CHECK_NEAR(ne.delta0, 0.0, 0.03);
  CHECK_NEAR(ne.sigma0, 1.0, 0.03);
  CHECK(ne.p0 >= 0.95);
}

TEST_CASE("empirical null consistency over 50 seeds") {
  const double true_delta = 0.15, true_sigma = 1.1;
  double sum_delta = 0.0, sum_sigma = 0.0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const auto z = normal_draws(derive_seed(2200, s), 10000, true_delta, true_sigma);
    const NullEstimate ne = fit_empirical_null(z);
    sum_delta += ne.delta0;
    sum_sigma += ne.sigma0;
  }
  CHECK_NEAR(sum_delta / seeds, true_delta, 0.02);
  CHECK_NEAR(sum_sigma / seeds, true_sigma, 0.02);
}

TEST_CASE("empirical null requires enough cases") {
  const auto z = normal_draws(1, 150);
  CHECK_THROWS_WITH_AS(fit_empirical_null(z), doctest::Contains("at least"), DataError);
}

TEST_CASE("null_density_eval closed forms") {
  const NullEstimate theo = NullEstimate::theoretical();
  const auto at0 = null_density_eval(theo, 0.0);
  CHECK_NEAR(at0.f0, 0.39894, 1e-5);
  CHECK_NEAR(at0.big_f0, 0.5, 1e-12);

  NullEstimate emp;
  emp.delta0 = -0.29;
  emp.sigma0 = 1.01;
  emp.source = NullEstimate::Source::empirical_mle;
  CHECK_NEAR(null_density_eval(emp, -0.29).f0, 0.39499, 1e-5);

  CHECK_NEAR(1.0 - null_density_eval(theo, 2.5).big_f0, 0.00621, 1e-5);
}
