#include "covfdr/glm.hpp"

#include <algorithm>
#include <cmath>

#include "covfdr/core.hpp"

namespace covfdr {

namespace {

constexpr double kEtaMax = 30.0;
constexpr double kRidgeFallback = 1e-4;
constexpr double kSeparationEta = 15.0;

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) > 0.0) dev += y(i) * std::log(y(i) / mu(i));
    dev -= y(i) - mu(i);
  }
  return 2.0 * dev;
}

double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& n,
                         const Eigen::VectorXd& p) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double pi = std::clamp(p(i), 1e-12, 1.0 - 1e-12);
    if (y(i) > 0.0) dev += y(i) * std::log(y(i) / (n(i) * pi));
    const double f = n(i) - y(i);
    if (f > 0.0) dev += f * std::log(f / (n(i) * (1.0 - pi)));
  }
  return 2.0 * dev;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd x = ldlt.solve(b);
    if (x.allFinite()) return x;
  }
  return a.completeOrthogonalDecomposition().solve(b);
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& a) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() == Eigen::Success) {
    Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    if (inv.allFinite()) return inv;
  }
  return a.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

GlmFit fit_poisson_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       double tol, int max_iter) {
  if (x.rows() != y.size()) throw DataError("poisson glm: design/response size mismatch");
  if (x.rows() < x.cols()) throw FitError("poisson glm: fewer rows than coefficients");

  GlmFit fit;
  // start from least squares on log counts
  Eigen::VectorXd logy(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) logy(i) = std::log(std::max(y(i), 0.5));
  fit.beta = x.colPivHouseholderQr().solve(logy);

  Eigen::VectorXd eta = (x * fit.beta).cwiseMin(kEtaMax).cwiseMax(-kEtaMax);
  Eigen::VectorXd mu = eta.array().exp();
  double dev = poisson_deviance(y, mu);

  for (int it = 0; it < max_iter; ++it) {
    fit.iterations = it + 1;
    const Eigen::MatrixXd xtwx = x.transpose() * mu.asDiagonal() * x;
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    const Eigen::VectorXd delta = solve_spd(xtwx, score);
    if (!delta.allFinite()) break;

    double step = 1.0;
    bool improved = false;
    Eigen::VectorXd cand, mu_c;
    double dev_c = dev;
    for (int h = 0; h < 30; ++h) {
      cand = fit.beta + step * delta;
      Eigen::VectorXd eta_c = (x * cand).cwiseMin(kEtaMax).cwiseMax(-kEtaMax);
      mu_c = eta_c.array().exp();
      dev_c = poisson_deviance(y, mu_c);
      if (dev_c <= dev + 1e-10) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      fit.converged = true;  // no descent direction left; at a (local) optimum
      break;
    }
    const double moved = (step * delta).cwiseAbs().maxCoeff();
    fit.beta = cand;
    mu = mu_c;
    dev = dev_c;
    if (moved < tol) {
      fit.converged = true;
      break;
    }
  }

  fit.fitted = mu;
  fit.deviance = dev;
  fit.fisher_info = x.transpose() * mu.asDiagonal() * x;
  fit.covariance = invert_spd(fit.fisher_info);
  if (!fit.converged) throw FitError("poisson glm: IRLS failed to converge");
  return fit;
}

GlmFit fit_logistic_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& n, double ridge, double tol, int max_iter) {
  if (x.rows() != y.size() || x.rows() != n.size())
    throw DataError("logistic glm: design/response size mismatch");

  const Eigen::Index p = x.cols();
  Eigen::MatrixXd penalty = Eigen::MatrixXd::Identity(p, p);
  penalty(0, 0) = 0.0;  // intercept unpenalized
  penalty *= ridge;

  GlmFit fit;
  fit.ridged = ridge > 0.0;
  fit.beta = Eigen::VectorXd::Zero(p);
  const double pbar = std::clamp((y.sum() + 0.5) / (n.sum() + 1.0), 1e-6, 1.0 - 1e-6);
  fit.beta(0) = std::log(pbar / (1.0 - pbar));

  auto probs = [&](const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = (x * beta).cwiseMin(kEtaMax).cwiseMax(-kEtaMax);
    return Eigen::VectorXd(1.0 / (1.0 + (-eta.array()).exp()));
  };
  auto penalized_dev = [&](const Eigen::VectorXd& beta, const Eigen::VectorXd& prob) {
    return binomial_deviance(y, n, prob) + beta.dot(penalty * beta);
  };

  Eigen::VectorXd prob = probs(fit.beta);
  double dev = penalized_dev(fit.beta, prob);

  for (int it = 0; it < max_iter; ++it) {
    fit.iterations = it + 1;
    Eigen::VectorXd w = (n.array() * prob.array() * (1.0 - prob.array())).cwiseMax(1e-10);
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x + penalty;
    const Eigen::VectorXd score =
        x.transpose() * (y - n.cwiseProduct(prob)) - penalty * fit.beta;
    const Eigen::VectorXd delta = solve_spd(info, score);
    if (!delta.allFinite()) break;

    double step = 1.0;
    bool improved = false;
    Eigen::VectorXd cand, prob_c;
    double dev_c = dev;
    for (int h = 0; h < 30; ++h) {
      cand = fit.beta + step * delta;
      prob_c = probs(cand);
      dev_c = penalized_dev(cand, prob_c);
      if (dev_c <= dev + 1e-10) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      fit.converged = true;
      break;
    }
    const double moved = (step * delta).cwiseAbs().maxCoeff();
    fit.beta = cand;
    prob = prob_c;
    dev = dev_c;
    if (moved < tol) {
      fit.converged = true;
      break;
    }
  }

  fit.fitted = prob;
  fit.deviance = binomial_deviance(y, n, prob);
  Eigen::VectorXd w = (n.array() * prob.array() * (1.0 - prob.array())).cwiseMax(1e-10);
  fit.fisher_info = x.transpose() * w.asDiagonal() * x + penalty;
  if (ridge > 0.0) {
    // sandwich: penalized curvature around the unpenalized information
    const Eigen::MatrixXd unpen = x.transpose() * w.asDiagonal() * x;
    const Eigen::MatrixXd inv_pen = invert_spd(fit.fisher_info);
    fit.covariance = inv_pen * unpen * inv_pen;
  } else {
    fit.covariance = invert_spd(fit.fisher_info);
  }
  return fit;
}

bool logistic_separation(const Eigen::MatrixXd& x, const GlmFit& fit) {
  if (!fit.converged) return true;
  const Eigen::VectorXd eta = x * fit.beta;
  return eta.cwiseAbs().maxCoeff() > kSeparationEta;
}

GlmFit fit_logistic_glm_guarded(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& n) {
  GlmFit fit = fit_logistic_glm(x, y, n);
  if (logistic_separation(x, fit)) {
    fit = fit_logistic_glm(x, y, n, kRidgeFallback);
    fit.ridged = true;
  }
  return fit;
}

}  // namespace covfdr
