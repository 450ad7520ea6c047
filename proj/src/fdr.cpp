#include "covfdr/fdr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covfdr/stats.hpp"

namespace covfdr {

double local_fdr_value(double p0, double f0, double f) {
  if (!(f > 0.0)) throw DataError("local fdr: mixture density must be positive");
  return std::min(1.0, p0 * f0 / f);
}

double tail_fdr_value(double p0, double big_f0, double big_f) {
  if (!(big_f > 0.0)) throw DataError("tail Fdr: mixture tail mass must be positive");
  return std::min(1.0, p0 * big_f0 / big_f);
}

namespace {

FdrCurve build_curve(std::vector<double> grid, std::vector<double> f, std::vector<double> f0,
                     double p0, const NullEstimate& ne,
                     std::shared_ptr<const DensityFit> density) {
  const std::size_t m = grid.size();
  FdrCurve curve;
  curve.grid = std::move(grid);
  curve.f = std::move(f);
  curve.f0 = std::move(f0);
  curve.null_estimate = ne;
  curve.density = std::move(density);
  curve.fdr_raw.resize(m);
  curve.fdr.resize(m);
  curve.fdr_left.resize(m);
  curve.fdr_right.resize(m);

  for (std::size_t i = 0; i < m; ++i) {
    if (!(curve.f[i] > 0.0)) throw FitError("fdr curve: non-positive density on grid");
    curve.fdr_raw[i] = p0 * curve.f0[i] / curve.f[i];
    curve.fdr[i] = std::min(1.0, curve.fdr_raw[i]);
  }
  double cum_f = 0.0, cum_f0 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    cum_f += curve.f[i];
    cum_f0 += curve.f0[i];
    curve.fdr_left[i] = std::min(1.0, p0 * cum_f0 / cum_f);
  }
  cum_f = cum_f0 = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    cum_f += curve.f[i];
    cum_f0 += curve.f0[i];
    curve.fdr_right[i] = std::min(1.0, p0 * cum_f0 / cum_f);
  }
  return curve;
}

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (xs.empty()) throw DataError("fdr curve: empty grid");
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

double FdrCurve::fdr_raw_at(double z) const {
  if (density) {
    const double f0 = null_density_eval(null_estimate, z).f0;
    return null_estimate.p0 * f0 / density->density(z);
  }
  return interp(grid, fdr_raw, z);
}

double FdrCurve::fdr_at(double z) const { return std::min(1.0, fdr_raw_at(z)); }

FdrCurve local_fdr_curve(const NullEstimate& ne, const DensityFit& density,
                         std::vector<double> grid) {
  const std::size_t m = grid.size();
  if (m == 0) throw DataError("local_fdr_curve: empty grid");
  std::vector<double> f(m), f0(m);
  for (std::size_t i = 0; i < m; ++i) {
    f[i] = density.density(grid[i]);
    f0[i] = null_density_eval(ne, grid[i]).f0;
  }
  return build_curve(std::move(grid), std::move(f), std::move(f0), ne.p0, ne,
                     std::make_shared<DensityFit>(density));
}

FdrCurve local_fdr_curve(const NullEstimate& ne, const DensityFit& density) {
  return local_fdr_curve(ne, density, density.spec().midpoints());
}

FdrCurve fdr_curve_from_values(std::vector<double> grid, std::vector<double> f,
                               std::vector<double> f0, double p0, const NullEstimate& ne) {
  if (grid.size() != f.size() || grid.size() != f0.size())
    throw DataError("fdr_curve_from_values: size mismatch");
  return build_curve(std::move(grid), std::move(f), std::move(f0), p0, ne, nullptr);
}

namespace {

std::vector<double> direction_pvalues(std::span<const double> z, const NullEstimate& ne,
                                      Direction dir) {
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = (z[i] - ne.delta0) / ne.sigma0;
    switch (dir) {
      case Direction::left: p[i] = norm_cdf(s); break;
      case Direction::right: p[i] = norm_cdf(-s); break;
      case Direction::two_sided: p[i] = 2.0 * norm_cdf(-std::fabs(s)); break;
    }
  }
  return p;
}

}  // namespace

RejectionSet bh_reject(std::span<const double> z, const NullEstimate& ne, double q,
                       Direction dir) {
  if (!(q > 0.0 && q < 1.0)) throw DataError("bh_reject: q outside (0,1)");
  const std::size_t n = z.size();
  RejectionSet rs;
  rs.rule = RejectionSet::Rule::bh;
  rs.direction = dir;
  rs.level = q;
  if (n == 0) return rs;

  const std::vector<double> p = direction_pvalues(z, ne, dir);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  // step-up: largest rank i with p0 * p_(i) <= i q / N
  std::size_t cutoff_rank = 0;
  for (std::size_t i = n; i-- > 0;) {
    if (ne.p0 * p[order[i]] <= (static_cast<double>(i + 1) * q) / static_cast<double>(n)) {
      cutoff_rank = i + 1;
      break;
    }
  }
  if (cutoff_rank == 0) return rs;

  rs.threshold_p = p[order[cutoff_rank - 1]];
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] <= rs.threshold_p) rs.rejected_indices.push_back(i);

  // rejection-region boundary: largest rejected z (left), smallest (right),
  // smallest rejected |standardized z| (two-sided)
  double thr = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t idx : rs.rejected_indices) {
    const double boundary = dir == Direction::two_sided
                                ? std::fabs((z[idx] - ne.delta0) / ne.sigma0)
                                : z[idx];
    if (std::isnan(thr))
      thr = boundary;
    else if (dir == Direction::left)
      thr = std::max(thr, boundary);
    else
      thr = std::min(thr, boundary);
  }
  rs.threshold_z = thr;
  return rs;
}

RejectionSet bh_reject(const Dataset& ds, const NullEstimate& ne, double q, Direction dir) {
  const std::vector<double> z = ds.z_values();
  RejectionSet rs = bh_reject(z, ne, q, dir);
  rs.rejected_ids.reserve(rs.rejected_indices.size());
  for (std::size_t i : rs.rejected_indices) rs.rejected_ids.push_back(ds.at(i).id);
  return rs;
}

RejectionSet bonferroni_reject(std::span<const double> pvalues, double alpha) {
  RejectionSet rs;
  rs.rule = RejectionSet::Rule::bonferroni;
  rs.direction = Direction::two_sided;
  rs.level = alpha;
  if (pvalues.empty()) return rs;
  const double threshold = alpha / static_cast<double>(pvalues.size());
  rs.threshold_p = threshold;
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    if (pvalues[i] < 0.0 || pvalues[i] > 1.0)
      throw DataError("bonferroni_reject: p-value outside [0,1]");
    if (pvalues[i] <= threshold) rs.rejected_indices.push_back(i);
  }
  return rs;
}

double false_discovery_proportion(const RejectionSet& rs, const Dataset& ds) {
  if (rs.rejected_indices.empty()) return 0.0;
  std::size_t nulls = 0;
  for (std::size_t i : rs.rejected_indices) {
    const auto& c = ds.at(i);
    if (!c.is_null_truth)
      throw DataError("false_discovery_proportion: case '" + c.id + "' has no truth label");
    if (*c.is_null_truth) ++nulls;
  }
  return static_cast<double>(nulls) / static_cast<double>(rs.rejected_indices.size());
}

AccuracyReport fdrbar_accuracy(std::size_t n, double f_z, double z) {
  if (n < 1) throw DataError("fdrbar_accuracy: N must be >= 1");
  if (!(f_z > 0.0 && f_z < 1.0)) throw DataError("fdrbar_accuracy: F(z) outside (0,1)");
  AccuracyReport rep;
  rep.z = z;
  rep.n = n;
  rep.f_z = f_z;
  rep.e_z = static_cast<double>(n) * f_z;
  rep.d = (1.0 - f_z) / rep.e_z;
  rep.c = (1.0 - 2.0 * f_z) / (1.0 - f_z);
  rep.mean_d = 1.0 + rep.d - rep.d * rep.d * rep.c;
  rep.var_d = rep.d - rep.d * rep.d * (6.0 * rep.c - 1.0);
  rep.cv_first_order = std::sqrt(rep.d);
  rep.cv = rep.cv_first_order * (1.0 - rep.d * (3.0 * rep.c - 0.5));
  return rep;
}

}  // namespace covfdr
