#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <vector>

#include "covfdr/stats.hpp"

using namespace covfdr;

namespace {

// Independent high-precision oracle for the normal c.d.f.: Gauss-Legendre
// quadrature of the density from 0 to z, plus one half.
double cdf_quadrature(double z) {
  // 64-point Gauss-Legendre on [0, z] in 8 panels
  static const double nodes[] = {-0.9602898564975363, -0.7966664774136267,
                                 -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
  static const double weights[] = {0.1012285362903763, 0.2223810344533745,
                                   0.3137066458778873, 0.3626837833783620,
                                   0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};
  const int panels = 16;
  double integral = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = z * p / panels, b = z * (p + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < 8; ++i) integral += weights[i] * half * norm_pdf(mid + half * nodes[i]);
  }
  return 0.5 + integral;
}

}  // namespace

TEST_CASE("normal pdf and cdf match the quadrature oracle on a fine grid") {
  for (int i = 0; i < 1000; ++i) {
    const double z = -8.0 + 16.0 * i / 999.0;
    CHECK_NEAR(norm_cdf(z), cdf_quadrature(z), 1e-10);
  }
  CHECK_NEAR(norm_pdf(0.0), 0.3989422804014327, 1e-15);
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-8, 1e-4, 0.01, 0.3, 0.5, 0.84, 0.99, 1.0 - 1e-6}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS(norm_quantile(0.0));
  CHECK_THROWS(norm_quantile(1.0));
}

TEST_CASE("sample quantile and sd basics") {
  std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
  CHECK(median(v) == doctest::Approx(2.5));
  CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(v, 1.0) == doctest::Approx(4.0));
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(sample_sd(std::vector<double>{1.0, 1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(sample_sd(std::vector<double>{0.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("rng normal moments are sane") {
  Rng rng(123);
  double s = 0.0, ss = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    ss += x * x;
  }
  CHECK_NEAR(s / n, 0.0, 0.01);
  CHECK_NEAR(ss / n, 1.0, 0.02);
}
