#include "covfdr/spline.hpp"

#include <algorithm>
#include <stdexcept>

#include "covfdr/core.hpp"

namespace covfdr {

namespace {

// Cox-de Boor value or derivative of the cubic B-spline B_{j,3} at x.
double bspline_basis(const std::vector<double>& t, int j, int k, double x, int der) {
  if (der > 0) {
    // derivative recursion
    double left = 0.0, right = 0.0;
    if (t[j + k] != t[j])
      left = bspline_basis(t, j, k - 1, x, der - 1) * k / (t[j + k] - t[j]);
    if (t[j + k + 1] != t[j + 1])
      right = bspline_basis(t, j + 1, k - 1, x, der - 1) * k / (t[j + k + 1] - t[j + 1]);
    return left - right;
  }
  if (k == 0) return (x >= t[j] && x < t[j + 1]) ? 1.0 : 0.0;
  double left = 0.0, right = 0.0;
  if (t[j + k] != t[j]) left = (x - t[j]) / (t[j + k] - t[j]) * bspline_basis(t, j, k - 1, x, 0);
  if (t[j + k + 1] != t[j + 1])
    right = (t[j + k + 1] - x) / (t[j + k + 1] - t[j + 1]) * bspline_basis(t, j + 1, k - 1, x, 0);
  return left + right;
}

}  // namespace

NaturalSplineBasis::NaturalSplineBasis(double lo, double hi, int df) : lo_(lo), hi_(hi) {
  if (!(lo < hi)) throw DataError("spline basis: lo must be < hi");
  if (df < 3) throw DataError("spline basis: df must be >= 3");
  const int n_interior = df - 1;
  knots_.assign(4, lo);
  for (int i = 1; i <= n_interior; ++i)
    knots_.push_back(lo + (hi - lo) * static_cast<double>(i) / (n_interior + 1));
  knots_.insert(knots_.end(), 4, hi);
  const int nb = static_cast<int>(knots_.size()) - 4;

  // Second-derivative constraints at the two boundaries; the null space of the
  // 2 x nb constraint matrix is the natural-spline subspace.
  Eigen::MatrixXd constraints(2, nb);
  for (int j = 0; j < nb; ++j) {
    constraints(0, j) = bspline_basis(knots_, j, 3, lo, 2);
    constraints(1, j) = bspline_basis(knots_, j, 3, hi - 1e-12 * (hi - lo), 2);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  projection_ = svd.matrixV().rightCols(nb - 2);
}

Eigen::RowVectorXd NaturalSplineBasis::bspline_row(double x, int derivative) const {
  const int nb = static_cast<int>(knots_.size()) - 4;
  Eigen::RowVectorXd r(nb);
  // right-closed at hi: step just inside so the last basis function is active
  if (x >= hi_) x = hi_ - 1e-12 * (hi_ - lo_);
  if (x < lo_) x = lo_;
  for (int j = 0; j < nb; ++j) r(j) = bspline_basis(knots_, j, 3, x, derivative);
  return r;
}

Eigen::RowVectorXd NaturalSplineBasis::row(double x) const {
  return bspline_row(x, 0) * projection_;
}

Eigen::MatrixXd NaturalSplineBasis::design(std::span<const double> x) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), columns());
  for (std::size_t i = 0; i < x.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = row(x[i]);
  return m;
}

}  // namespace covfdr
