#pragma once

#include <Eigen/Dense>
#include <functional>

namespace covfdr {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer. Restarts once from the found optimum.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double ftol = 1e-9,
                             int max_iter = 2000, double initial_step = 0.1);

}  // namespace covfdr
