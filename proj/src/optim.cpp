#include "covfdr/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace covfdr {

namespace {

NelderMeadResult nm_once(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& start, double ftol, int max_iter,
                         double initial_step) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> pts(n + 1, start);
  std::vector<double> fv(n + 1);
  for (int i = 0; i < n; ++i) {
    double step = initial_step * std::max(1.0, std::fabs(start(i)));
    pts[i + 1](i) += step;
  }
  for (int i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  NelderMeadResult res;
  std::vector<int> order(n + 1);
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];

    if (std::fabs(fv[worst] - fv[best]) <=
        ftol * (std::fabs(fv[best]) + std::fabs(fv[worst]) + 1e-300) + 1e-300) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= n;

    Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
    double f_refl = f(refl);
    if (f_refl < fv[best]) {
      Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - pts[worst]);
      double f_exp = f(exp_pt);
      if (f_exp < f_refl) {
        pts[worst] = exp_pt;
        fv[worst] = f_exp;
      } else {
        pts[worst] = refl;
        fv[worst] = f_refl;
      }
    } else if (f_refl < fv[second]) {
      pts[worst] = refl;
      fv[worst] = f_refl;
    } else {
      Eigen::VectorXd contr = centroid + 0.5 * (pts[worst] - centroid);
      double f_contr = f(contr);
      if (f_contr < fv[worst]) {
        pts[worst] = contr;
        fv[worst] = f_contr;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = pts[best];
  res.fmin = fv[best];
  return res;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double ftol, int max_iter,
                             double initial_step) {
  NelderMeadResult first = nm_once(f, start, ftol, max_iter, initial_step);
  // restart from the solution with a smaller simplex to escape premature collapse
  NelderMeadResult second = nm_once(f, first.x, ftol, max_iter, 0.1 * initial_step);
  second.iterations += first.iterations;
  if (second.fmin > first.fmin) {
    first.iterations = second.iterations;
    return first;
  }
  return second;
}

}  // namespace covfdr
