#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace covfdr {

// Natural cubic spline basis on [lo, hi]: cubic B-splines with df-1 interior
// knots at equal quantiles of the range, constrained to zero second derivative
// at the boundaries. Spans constants; df+1 columns, matching a df-degree
// polynomial's parameter count.
class NaturalSplineBasis {
 public:
  NaturalSplineBasis(double lo, double hi, int df);

  int columns() const { return static_cast<int>(projection_.cols()); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  // Basis row at x (x clamped to [lo, hi]).
  Eigen::RowVectorXd row(double x) const;
  Eigen::MatrixXd design(std::span<const double> x) const;

 private:
  Eigen::RowVectorXd bspline_row(double x, int derivative) const;

  double lo_, hi_;
  std::vector<double> knots_;   // full clamped knot vector
  Eigen::MatrixXd projection_;  // B-spline coefficients -> natural subspace
};

}  // namespace covfdr
