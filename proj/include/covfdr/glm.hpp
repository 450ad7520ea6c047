#pragma once

#include <Eigen/Dense>

namespace covfdr {

struct GlmFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd fisher_info;  // penalized information at the solution
  Eigen::MatrixXd covariance;   // inverse information (sandwich when ridged)
  Eigen::VectorXd fitted;       // Poisson: means; logistic: probabilities
  double deviance = 0.0;
  int iterations = 0;
  bool converged = false;
  bool ridged = false;
};

// Poisson log-linear IRLS with deviance step-halving.
GlmFit fit_poisson_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       double tol = 1e-8, int max_iter = 100);

// Weighted binomial logistic regression: y successes out of n trials per row.
// ridge penalizes non-intercept coefficients (column 0 is the intercept).
GlmFit fit_logistic_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& n, double ridge = 0.0,
                        double tol = 1e-8, int max_iter = 50);

// True when a plain logistic fit diverged or saturated (complete separation).
bool logistic_separation(const Eigen::MatrixXd& x, const GlmFit& fit);

// Plain fit with a ridge (1e-4) refit when separation is detected.
GlmFit fit_logistic_glm_guarded(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& n);

}  // namespace covfdr
