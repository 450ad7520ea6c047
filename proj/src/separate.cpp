#include "covfdr/separate.hpp"

#include <algorithm>
#include <cmath>

#include "covfdr/glm.hpp"
#include "covfdr/stats.hpp"

namespace covfdr {

namespace {
constexpr double kPiFloor = 1e-6;
constexpr double kEtaMax = 30.0;

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-std::clamp(eta, -kEtaMax, kEtaMax))); }
}  // namespace

Eigen::RowVectorXd ClassProbCurve::basis_row(double z) const {
  if (basis_ == LogitBasis::cubic) {
    const double u = z / z_scale_;
    Eigen::RowVectorXd r(4);
    r << 1.0, u, u * u, u * u * u;
    return r;
  }
  const double t = side_ == FlatSide::positive ? std::max(z - 1.0, 0.0) : std::max(-z - 1.0, 0.0);
  Eigen::RowVectorXd r(3);
  r << 1.0, t * t, t * t * t;
  return r;
}

Eigen::RowVectorXd ClassProbCurve::basis_slope_row(double z) const {
  if (basis_ == LogitBasis::cubic) {
    const double u = z / z_scale_;
    Eigen::RowVectorXd r(4);
    r << 0.0, 1.0 / z_scale_, 2.0 * u / z_scale_, 3.0 * u * u / z_scale_;
    return r;
  }
  const double sign = side_ == FlatSide::positive ? 1.0 : -1.0;
  const double t = side_ == FlatSide::positive ? std::max(z - 1.0, 0.0) : std::max(-z - 1.0, 0.0);
  Eigen::RowVectorXd r(3);
  r << 0.0, 2.0 * t * sign, 3.0 * t * t * sign;
  return r;
}

double ClassProbCurve::logit(double z) const { return basis_row(z).dot(beta_); }
double ClassProbCurve::prob(double z) const { return sigmoid(logit(z)); }
double ClassProbCurve::logit_slope(double z) const { return basis_slope_row(z).dot(beta_); }

double ClassProbCurve::sd_logit(double z) const {
  const Eigen::RowVectorXd r = basis_row(z);
  return std::sqrt(std::max(0.0, double(r * covariance_ * r.transpose())));
}

double ClassProbCurve::sd_logit_slope(double z) const {
  const Eigen::RowVectorXd r = basis_slope_row(z);
  return std::sqrt(std::max(0.0, double(r * covariance_ * r.transpose())));
}

double ClassProbCurve::sd_mean_slope(double z_lo, double z_hi) const {
  const Eigen::RowVectorXd d = (basis_row(z_hi) - basis_row(z_lo)) / (z_hi - z_lo);
  return std::sqrt(std::max(0.0, double(d * covariance_ * d.transpose())));
}

ClassProbCurve fit_class_prob_curve(const BinnedCounts& bc, LogitBasis basis, FlatSide side) {
  if (!bc.class_counts) throw DataError("fit_class_prob_curve: class counts required");

  std::vector<double> mids, nk, nak;
  const auto all_mids = bc.spec.midpoints();
  for (int i = 0; i < bc.spec.k; ++i) {
    if (bc.counts[i] > 0) {
      mids.push_back(all_mids[i]);
      nk.push_back(bc.counts[i]);
      nak.push_back((*bc.class_counts)[i]);
    }
  }
  if (mids.size() < 8) throw DataError("fit_class_prob_curve: needs >= 8 occupied bins");

  ClassProbCurve curve;
  curve.basis_ = basis;
  curve.side_ = side;
  curve.z_scale_ = std::max(std::fabs(bc.spec.lo), std::fabs(bc.spec.hi));

  const Eigen::Index m = static_cast<Eigen::Index>(mids.size());
  Eigen::MatrixXd x(m, basis == LogitBasis::cubic ? 4 : 3);
  for (Eigen::Index i = 0; i < m; ++i) x.row(i) = curve.basis_row(mids[i]);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(nak.data(), m);
  Eigen::VectorXd n = Eigen::Map<const Eigen::VectorXd>(nk.data(), m);

  GlmFit glm = fit_logistic_glm_guarded(x, y, n);
  curve.beta_ = glm.beta;
  curve.covariance_ = glm.covariance;
  curve.ridged_ = glm.ridged;
  curve.converged_ = glm.converged;
  return curve;
}

NullClassProb NullClassProb::constant(double pi_a0) {
  if (!(pi_a0 > 0.0 && pi_a0 <= 1.0)) throw DataError("NullClassProb: constant outside (0,1]");
  NullClassProb ncp;
  ncp.kind_ = Kind::constant;
  ncp.value_ = pi_a0;
  return ncp;
}

NullClassProb NullClassProb::from_rates(double pi_a, double p_a0, double p_b0) {
  const double pi_b = 1.0 - pi_a;
  const double p0 = pi_a * p_a0 + pi_b * p_b0;
  return constant(pi_a * p_a0 / p0);
}

NullClassProb NullClassProb::parametric(const NullEstimate& null_a, const NullEstimate& null_b,
                                        double pi_a) {
  if (!(pi_a > 0.0 && pi_a < 1.0)) throw DataError("NullClassProb: pi_a outside (0,1)");
  NullClassProb ncp;
  ncp.kind_ = Kind::parametric;
  ncp.pi_a_ = pi_a;
  ncp.null_a_ = null_a;
  ncp.null_b_ = null_b;
  return ncp;
}

NullClassProb NullClassProb::plug_in_zero(const ClassProbCurve& pa) {
  NullClassProb ncp;
  ncp.kind_ = Kind::plug_in_zero;
  ncp.value_ = std::clamp(pa.prob(0.0), kPiFloor, 1.0 - kPiFloor);
  return ncp;
}

double NullClassProb::operator()(double z) const {
  if (kind_ != Kind::parametric) return value_;
  // odds form of Bayes' rule for two normal class nulls
  const double pi_b = 1.0 - pi_a_;
  const double sa = (z - null_a_.delta0) / null_a_.sigma0;
  const double sb = (z - null_b_.delta0) / null_b_.sigma0;
  const double log_odds = std::log(pi_a_ * null_a_.p0 * null_b_.sigma0) -
                          std::log(pi_b * null_b_.p0 * null_a_.sigma0) -
                          0.5 * (sa * sa - sb * sb);
  return sigmoid(log_odds);
}

SubclassFdrReport subclass_fdr_curve(const FdrCurve& fdr, const ZFunction& pa,
                                     const ZFunction& pa0, Correction correction,
                                     std::span<const double> class_a_z) {
  const std::size_t m = fdr.grid.size();
  SubclassFdrReport rep;
  rep.grid = fdr.grid;
  rep.fdr_combined = fdr.fdr;
  rep.r_a.resize(m);
  rep.fdr_a.resize(m);
  rep.log_fdr_raw.resize(m);
  rep.log_r_a.resize(m);

  const double plug_zero =
      correction == Correction::plug_in_zero ? std::clamp(pa(0.0), kPiFloor, 1.0) : 0.0;

  auto ratio_at = [&](double z) {
    double denom = pa(z);
    if (denom < kPiFloor) {
      rep.pi_floor_hit = true;
      denom = kPiFloor;
    }
    const double numer = correction == Correction::plug_in_zero ? plug_zero : pa0(z);
    return numer / denom;
  };

  for (std::size_t i = 0; i < m; ++i) {
    rep.r_a[i] = ratio_at(fdr.grid[i]);
    rep.log_fdr_raw[i] = std::log(fdr.fdr_raw[i]);
    rep.log_r_a[i] = std::log(rep.r_a[i]);
    rep.fdr_a[i] = std::min(1.0, fdr.fdr[i] * rep.r_a[i]);
  }

  // p̂_A0 = mean of fdr̂_A at the class-A cases (capped values)
  if (!class_a_z.empty()) {
    double sum = 0.0;
    for (double z : class_a_z) sum += std::min(1.0, fdr.fdr_at(z) * ratio_at(z));
    rep.p_a0_hat = sum / static_cast<double>(class_a_z.size());
  }

  if (correction == Correction::pa0_hat) {
    if (!rep.p_a0_hat)
      throw DataError("subclass_fdr_curve: pa0_hat correction needs class-A z values");
    const double factor = *rep.p_a0_hat / fdr.null_estimate.p0;
    for (std::size_t i = 0; i < m; ++i)
      rep.fdr_a[i] = std::min(1.0, fdr.fdr[i] * rep.r_a[i] * factor);
  }
  return rep;
}

SubclassFdrReport subclass_fdr_curve(const FdrCurve& fdr, const ClassProbCurve& pa,
                                     const NullClassProb& pa0, Correction correction,
                                     std::span<const double> class_a_z) {
  SubclassFdrReport rep = subclass_fdr_curve(
      fdr, [&pa](double z) { return pa.prob(z); }, [&pa0](double z) { return pa0(z); },
      correction, class_a_z);
  if (fdr.density) {
    SdCurves sd = sd_log_fdr_a(*fdr.density, pa, rep.grid);
    rep.sd_log_fdr = std::move(sd.sd_log_fdr);
    rep.sd_log_r_a = std::move(sd.sd_log_r_a);
    rep.sd_log_fdr_a = std::move(sd.sd_log_fdr_a);
  }
  return rep;
}

TailFdrReport subclass_tail_fdr(const FdrCurve& fdr, const ZFunction& pa,
                                const ZFunction& pa0, Direction dir) {
  if (dir == Direction::two_sided)
    throw DataError("subclass_tail_fdr: direction must be left or right");
  const std::size_t m = fdr.grid.size();
  TailFdrReport rep;
  rep.grid = fdr.grid;
  rep.direction = dir;
  rep.fdr_tail.resize(m);
  rep.r_a_tail.resize(m);
  rep.fdr_a_tail.resize(m);

  // cumulative sums of null mass, null A mass, mixture mass, mixture A mass
  const double p0 = fdr.null_estimate.p0;
  auto accumulate = [&](std::size_t i, double& c_f0, double& c_f0a, double& c_f, double& c_fa) {
    const double z = fdr.grid[i];
    const double f0 = fdr.f0[i];
    const double f = fdr.f[i];
    c_f0 += f0;
    c_f0a += pa0(z) * f0;
    c_f += f;
    c_fa += pa(z) * f;
  };
  auto fill = [&](std::size_t i, double c_f0, double c_f0a, double c_f, double c_fa) {
    if (!(c_f > 0.0) || !(c_f0 > 0.0)) throw FitError("subclass_tail_fdr: empty tail mass");
    if (!(c_fa > 0.0)) throw DataError("subclass_tail_fdr: empty tail (no class-A mass)");
    rep.fdr_tail[i] = std::min(1.0, p0 * c_f0 / c_f);
    const double null_a_frac = c_f0a / c_f0;
    const double obs_a_frac = c_fa / c_f;
    rep.r_a_tail[i] = null_a_frac / obs_a_frac;
    rep.fdr_a_tail[i] = std::min(1.0, rep.fdr_tail[i] * rep.r_a_tail[i]);
  };

  double c_f0 = 0.0, c_f0a = 0.0, c_f = 0.0, c_fa = 0.0;
  if (dir == Direction::left) {
    for (std::size_t i = 0; i < m; ++i) {
      accumulate(i, c_f0, c_f0a, c_f, c_fa);
      fill(i, c_f0, c_f0a, c_f, c_fa);
    }
  } else {
    for (std::size_t i = m; i-- > 0;) {
      accumulate(i, c_f0, c_f0a, c_f, c_fa);
      fill(i, c_f0, c_f0a, c_f, c_fa);
    }
  }
  return rep;
}

TailFdrReport subclass_tail_fdr(const FdrCurve& fdr, const ClassProbCurve& pa,
                                const NullClassProb& pa0, Direction dir) {
  return subclass_tail_fdr(
      fdr, [&pa](double z) { return pa.prob(z); }, [&pa0](double z) { return pa0(z); }, dir);
}

RelevanceFdrValue relevance_weighted_fdr(const Dataset& ds, std::size_t focal_index,
                                         const RelevanceFunction& rho, const NullEstimate& ne,
                                         double z, Direction dir) {
  if (dir == Direction::two_sided)
    throw DataError("relevance_weighted_fdr: direction must be left or right");
  if (focal_index >= ds.size()) throw DataError("relevance_weighted_fdr: bad focal index");

  const Case& focal = ds.at(focal_index);
  const std::size_t n = ds.size();

  // All cases share one null here; the sums keep the per-case structure of the
  // general formula (numerator terms p_j0 F_j0 evaluated at the threshold z).
  const auto nv = null_density_eval(ne, z);
  const double tail_mass = dir == Direction::left ? nv.big_f0 : 1.0 - nv.big_f0;
  const double null_term = ne.p0 * tail_mass;

  double num_weighted = 0.0;  // Σ ρ_i(x_j) p_j0 F_j0(z)
  double num_total = 0.0;     // Σ p_j0 F_j0(z)
  double tail_weighted = 0.0; // Σ_{tail} ρ_i(x_j)
  std::size_t n_tail = 0;

  for (std::size_t j = 0; j < n; ++j) {
    const Case& other = ds.at(j);
    const double r = rho(focal, other);
    num_weighted += r * null_term;
    num_total += null_term;
    const bool in_tail = dir == Direction::left ? other.z <= z : other.z >= z;
    if (in_tail) {
      tail_weighted += r;
      ++n_tail;
    }
  }
  if (n_tail == 0) throw DataError("relevance_weighted_fdr: empty tail (N(z) = 0)");
  if (!(tail_weighted > 0.0))
    throw DataError("relevance_weighted_fdr: zero relevance mass in tail");
  if (!(num_total > 0.0)) throw FitError("relevance_weighted_fdr: zero expected null mass");

  RelevanceFdrValue out;
  out.n_tail = n_tail;
  out.fdr_bar = num_total / static_cast<double>(n_tail);
  const double numer = num_weighted / num_total;
  const double denom = tail_weighted / static_cast<double>(n_tail);
  out.r_bar = numer / denom;
  out.fdr_bar_i = out.fdr_bar * out.r_bar;
  return out;
}

FlatnessReport null_flatness_diagnostic(const ClassProbCurve& pa, double window_lo,
                                        double window_hi) {
  if (!(window_lo < window_hi)) throw DataError("null_flatness_diagnostic: bad window");
  FlatnessReport rep;
  rep.window_lo = window_lo;
  rep.window_hi = window_hi;

  const int n_pts = 41;
  double max_slope = 0.0;
  for (int i = 0; i < n_pts; ++i) {
    const double z = window_lo + (window_hi - window_lo) * i / (n_pts - 1);
    max_slope = std::max(max_slope, std::fabs(pa.logit_slope(z)));
  }
  rep.max_abs_logit_slope = max_slope;

  rep.mean_slope = (pa.logit(window_hi) - pa.logit(window_lo)) / (window_hi - window_lo);
  rep.mean_slope_se = pa.sd_mean_slope(window_lo, window_hi);
  rep.flat = std::fabs(rep.mean_slope) <= 2.0 * rep.mean_slope_se;
  return rep;
}

SdCurves sd_log_fdr_a(const DensityFit& density, const ClassProbCurve& pa,
                      std::span<const double> grid) {
  SdCurves out;
  out.sd_log_fdr.reserve(grid.size());
  out.sd_log_r_a.reserve(grid.size());
  out.sd_log_fdr_a.reserve(grid.size());
  for (double z : grid) {
    const double sd_f = density.sd_log_density(z);
    const double sd_ra = pa.sd_logit(z) * (1.0 - pa.prob(z));
    out.sd_log_fdr.push_back(sd_f);
    out.sd_log_r_a.push_back(sd_ra);
    out.sd_log_fdr_a.push_back(std::sqrt(sd_f * sd_f + sd_ra * sd_ra));
  }
  return out;
}

}  // namespace covfdr
