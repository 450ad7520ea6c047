#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>

#include "covfdr/glm.hpp"
#include "covfdr/optim.hpp"
#include "covfdr/spline.hpp"
#include "covfdr/stats.hpp"

using namespace covfdr;

TEST_CASE("poisson irls recovers a log-linear intensity") {
  Rng rng(5);
  const int n = 200;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double u = -1.0 + 2.0 * i / (n - 1);
    x(i, 0) = 1.0;
    x(i, 1) = u;
    const double mu = std::exp(3.0 + 0.7 * u);
    // poisson draw by inversion
    double l = std::exp(-mu), p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= rng.uniform();
    } while (p > l);
    y(i) = k - 1;
  }
  const GlmFit fit = fit_poisson_glm(x, y);
  CHECK(fit.converged);
  CHECK_NEAR(fit.beta(0), 3.0, 0.05);
  CHECK_NEAR(fit.beta(1), 0.7, 0.1);
  // intercept identity: fitted total equals observed total
  CHECK(fit.fitted.sum() == doctest::Approx(y.sum()).epsilon(1e-8));
}

TEST_CASE("logistic irls recovers a known slope with binomial trials") {
  Rng rng(6);
  const int n = 60;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n), trials(n);
  for (int i = 0; i < n; ++i) {
    const double u = -2.0 + 4.0 * i / (n - 1);
    x(i, 0) = 1.0;
    x(i, 1) = u;
    trials(i) = 200;
    const double p = 1.0 / (1.0 + std::exp(-(0.3 + 1.2 * u)));
    int successes = 0;
    for (int t = 0; t < 200; ++t) successes += rng.uniform() < p;
    y(i) = successes;
  }
  const GlmFit fit = fit_logistic_glm(x, y, trials);
  CHECK(fit.converged);
  CHECK_FALSE(fit.ridged);
  CHECK_NEAR(fit.beta(0), 0.3, 0.1);
  CHECK_NEAR(fit.beta(1), 1.2, 0.1);
}

TEST_CASE("guarded logistic fit survives complete separation") {
  const int n = 20;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n), trials(n);
  for (int i = 0; i < n; ++i) {
    const double u = -1.0 + 2.0 * i / (n - 1);
    x(i, 0) = 1.0;
    x(i, 1) = u;
    trials(i) = 10;
    y(i) = u > 0 ? 10 : 0;  // perfectly separated
  }
  const GlmFit fit = fit_logistic_glm_guarded(x, y, trials);
  CHECK(fit.ridged);
  CHECK(fit.beta.allFinite());
  CHECK(fit.covariance.allFinite());
}

TEST_CASE("nelder-mead minimizes a shifted quadratic and rosenbrock") {
  auto quad = [](const Eigen::VectorXd& v) {
    return (v(0) - 1.5) * (v(0) - 1.5) + 2.0 * (v(1) + 0.5) * (v(1) + 0.5);
  };
  Eigen::VectorXd start = Eigen::VectorXd::Zero(2);
  const NelderMeadResult res = nelder_mead(quad, start);
  CHECK(res.converged);
  CHECK_NEAR(res.x(0), 1.5, 1e-5);
  CHECK_NEAR(res.x(1), -0.5, 1e-5);

  auto rosen = [](const Eigen::VectorXd& v) {
    const double a = 1.0 - v(0);
    const double b = v(1) - v(0) * v(0);
    return a * a + 100.0 * b * b;
  };
  const NelderMeadResult res2 = nelder_mead(rosen, start, 1e-12, 5000, 0.5);
  CHECK_NEAR(res2.x(0), 1.0, 1e-3);
  CHECK_NEAR(res2.x(1), 1.0, 1e-3);
}

TEST_CASE("natural spline basis spans constants and is smooth") {
  const NaturalSplineBasis basis(-4.0, 4.0, 7);
  CHECK(basis.columns() == 8);

  // least-squares fit of the constant function 1 should be essentially exact
  const int n = 200;
  Eigen::MatrixXd x(n, basis.columns());
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = -4.0 + 8.0 * i / (n - 1);
  for (int i = 0; i < n; ++i) x.row(i) = basis.row(grid[i]);
  const Eigen::VectorXd c = x.colPivHouseholderQr().solve(ones);
  CHECK((x * c - ones).cwiseAbs().maxCoeff() < 1e-10);

  // continuity across an interior knot
  const double knot = -4.0 + 8.0 / 7.0;
  const Eigen::VectorXd coef = Eigen::VectorXd::Random(basis.columns());
  const double left = basis.row(knot - 1e-9).dot(coef);
  const double right = basis.row(knot + 1e-9).dot(coef);
  CHECK(left == doctest::Approx(right).epsilon(1e-6));
}
