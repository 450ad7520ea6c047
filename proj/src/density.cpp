#include "covfdr/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covfdr/glm.hpp"
#include "covfdr/optim.hpp"
#include "covfdr/stats.hpp"

namespace covfdr {

std::vector<double> BinSpec::midpoints() const {
  std::vector<double> m(k);
  for (int i = 0; i < k; ++i) m[i] = midpoint(i);
  return m;
}

BinSpec BinSpec::for_range(double z_min, double z_max) {
  if (!(z_min <= z_max)) throw DataError("bin spec: empty z range");
  BinSpec spec;
  spec.lo = z_min - 0.1;
  spec.hi = z_max + 0.1;
  spec.k = std::max(42, static_cast<int>(std::ceil((spec.hi - spec.lo) / 0.2)));
  return spec;
}

BinSpec BinSpec::for_data(std::span<const double> z) {
  if (z.empty()) throw DataError("bin spec: no data");
  auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  return for_range(*lo, *hi);
}

double BinnedCounts::total() const {
  double t = 0.0;
  for (double c : counts) t += c;
  return t;
}

std::vector<double> BinnedCounts::class_proportions() const {
  if (!class_counts) throw DataError("binned counts carry no class counts");
  std::vector<double> r(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    r[i] = counts[i] > 0 ? (*class_counts)[i] / counts[i]
                         : std::numeric_limits<double>::quiet_NaN();
  return r;
}

BinnedCounts bin_counts(std::span<const double> z, const BinSpec& spec,
                        std::span<const std::uint8_t> in_class) {
  if (!(spec.lo < spec.hi) || spec.k < 10) throw DataError("invalid bin spec");
  if (!in_class.empty() && in_class.size() != z.size())
    throw DataError("bin_counts: class flags size mismatch");

  BinnedCounts bc;
  bc.spec = spec;
  bc.counts.assign(spec.k, 0.0);
  if (!in_class.empty()) bc.class_counts = std::vector<double>(spec.k, 0.0);

  const double w = spec.width();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < spec.lo || z[i] > spec.hi)
      throw DataError("z outside range [" + std::to_string(spec.lo) + ", " +
                      std::to_string(spec.hi) + "]");
    int bin = std::min(spec.k - 1, static_cast<int>((z[i] - spec.lo) / w));
    bc.counts[bin] += 1.0;
    if (!in_class.empty() && in_class[i]) (*bc.class_counts)[bin] += 1.0;
  }
  return bc;
}

BinnedCounts bin_counts(const Dataset& ds, const BinSpec& spec,
                        const std::optional<std::string>& class_label) {
  const std::vector<double> z = ds.z_values();
  if (!class_label) return bin_counts(z, spec);
  std::vector<std::uint8_t> flags(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& c = ds.at(i);
    flags[i] = c.class_label && *c.class_label == *class_label ? 1 : 0;
  }
  return bin_counts(z, spec, flags);
}

Eigen::RowVectorXd DensityFit::design_row(double z) const {
  if (kind_ == DensityBasisKind::natural_spline) return spline_->row(z);
  // standardized polynomial 1, u, ..., u^df with u mapping [lo,hi] -> [-1,1]
  const double c = 0.5 * (spec_.lo + spec_.hi);
  const double h = 0.5 * (spec_.hi - spec_.lo);
  const double u = (std::clamp(z, spec_.lo, spec_.hi) - c) / h;
  Eigen::RowVectorXd r(df_ + 1);
  double v = 1.0;
  for (int j = 0; j <= df_; ++j) {
    r(j) = v;
    v *= u;
  }
  return r;
}

double DensityFit::log_density(double z) const {
  return design_row(z).dot(beta_) - log_norm_;
}

double DensityFit::density(double z) const { return std::exp(log_density(z)); }

double DensityFit::cdf(double z) const {
  if (z <= spec_.lo) return 0.0;
  if (z >= spec_.hi) return 1.0;
  const double w = spec_.width();
  const int bin = std::min(spec_.k - 1, static_cast<int>((z - spec_.lo) / w));
  const double below = bin > 0 ? cum_density_[bin - 1] : 0.0;
  const double into = z - (spec_.lo + bin * w);
  const double bin_mass = cum_density_[bin] - below;
  return below + bin_mass * (into / w);
}

double DensityFit::sd_log_density(double z) const {
  const Eigen::RowVectorXd g = design_row(z) - weighted_mean_row_;
  const double v = g * covariance_ * g.transpose();
  return std::sqrt(std::max(v, 0.0));
}

DensityFit fit_mixture_density(const BinnedCounts& bc, const DensityFitConfig& cfg) {
  if (cfg.df < 2) throw DataError("fit_mixture_density: df must be >= 2");
  const double total = bc.total();
  if (total < 100) throw DataError("fit_mixture_density: needs at least 100 cases");

  int occupied = 0;
  for (double c : bc.counts)
    if (c > 0) ++occupied;
  if (occupied < 2) throw FitError("degenerate design: all mass in one bin");

  DensityFit fit;
  fit.spec_ = bc.spec;
  fit.kind_ = cfg.basis;
  fit.df_ = cfg.df;
  if (cfg.basis == DensityBasisKind::natural_spline)
    fit.spline_ = std::make_shared<NaturalSplineBasis>(bc.spec.lo, bc.spec.hi, cfg.df);

  const auto mids = bc.spec.midpoints();
  Eigen::MatrixXd x(bc.spec.k, fit.kind_ == DensityBasisKind::natural_spline
                                   ? fit.spline_->columns()
                                   : cfg.df + 1);
  for (int i = 0; i < bc.spec.k; ++i) x.row(i) = fit.design_row(mids[i]);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(bc.counts.data(), bc.spec.k);

  GlmFit glm = fit_poisson_glm(x, y, cfg.tol, cfg.max_iter);

  fit.beta_ = glm.beta;
  fit.covariance_ = glm.covariance;
  fit.iterations_ = glm.iterations;
  fit.n_total_ = total;
  fit.fitted_.assign(glm.fitted.data(), glm.fitted.data() + glm.fitted.size());

  const double mu_sum = glm.fitted.sum();
  fit.log_norm_ = std::log(mu_sum * bc.spec.width());
  fit.weighted_mean_row_ = (glm.fitted / mu_sum).transpose() * x;

  fit.cum_density_.resize(bc.spec.k);
  double acc = 0.0;
  for (int i = 0; i < bc.spec.k; ++i) {
    acc += glm.fitted(i) / mu_sum;
    fit.cum_density_[i] = acc;
  }
  return fit;
}

DensityFit fit_mixture_density(const BinnedCounts& bc, int df) {
  DensityFitConfig cfg;
  cfg.df = df;
  return fit_mixture_density(bc, cfg);
}

NullEstimate fit_empirical_null(std::span<const double> z, const EmpiricalNullConfig& cfg) {
  if (z.size() < cfg.min_cases)
    throw DataError("fit_empirical_null: needs at least " + std::to_string(cfg.min_cases) +
                    " cases (use the subclass route for small sets)");
  if (!(cfg.central_fraction > 0.0 && cfg.central_fraction < 1.0))
    throw DataError("fit_empirical_null: central_fraction outside (0,1)");

  std::vector<double> zs(z.begin(), z.end());
  const double q_lo = (1.0 - cfg.central_fraction) / 2.0;
  const double a = quantile(zs, q_lo);
  const double b = quantile(zs, 1.0 - q_lo);
  if (!(a < b)) throw FitError("fit_empirical_null: degenerate central window");

  std::vector<double> z_in;
  z_in.reserve(zs.size());
  for (double v : zs)
    if (v >= a && v <= b) z_in.push_back(v);
  const double n = static_cast<double>(zs.size());
  const double n_in = static_cast<double>(z_in.size());

  auto nll = [&](const Eigen::VectorXd& t) {
    const double delta = t(0);
    const double sigma = std::exp(t(1));
    const double p0 = 1.0 / (1.0 + std::exp(-t(2)));
    const double window_mass =
        std::clamp(norm_cdf((b - delta) / sigma) - norm_cdf((a - delta) / sigma), 1e-12,
                   1.0 - 1e-12);
    const double theta = std::clamp(p0 * window_mass, 1e-12, 1.0 - 1e-12);
    double ll = n_in * std::log(theta) + (n - n_in) * std::log1p(-theta);
    double sum_sq = 0.0;
    for (double v : z_in) {
      const double s = (v - delta) / sigma;
      sum_sq += s * s;
    }
    ll += -0.5 * sum_sq - n_in * std::log(sigma) - n_in * std::log(window_mass);
    return -ll;
  };

  const double med = median(zs);
  const double iqr = quantile(zs, 0.75) - quantile(zs, 0.25);
  Eigen::VectorXd start(3);
  start << med, std::log(std::max(iqr / 1.349, 1e-3)), std::log(0.99 / 0.01);

  NelderMeadResult opt = nelder_mead(nll, start, cfg.tol, cfg.max_iter);
  if (!opt.converged) throw FitError("fit_empirical_null: optimizer failed to converge");

  NullEstimate ne;
  ne.delta0 = opt.x(0);
  ne.sigma0 = std::exp(opt.x(1));
  ne.p0 = std::min(1.0, 1.0 / (1.0 + std::exp(-opt.x(2))));
  ne.source = NullEstimate::Source::empirical_mle;
  if (!(ne.sigma0 > 0.0) || !std::isfinite(ne.sigma0))
    throw FitError("fit_empirical_null: sigma estimate not positive");
  return ne;
}

NullEstimate fit_empirical_null(const Dataset& ds, const EmpiricalNullConfig& cfg) {
  const std::vector<double> z = ds.z_values();
  return fit_empirical_null(z, cfg);
}

NullDensityValue null_density_eval(const NullEstimate& ne, double z) {
  const double s = (z - ne.delta0) / ne.sigma0;
  return {norm_pdf(s) / ne.sigma0, norm_cdf(s)};
}

}  // namespace covfdr
