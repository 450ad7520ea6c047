#include "covfdr/enrichment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "covfdr/density.hpp"
#include "covfdr/glm.hpp"
#include "covfdr/separate.hpp"
#include "covfdr/stats.hpp"

namespace covfdr {

namespace {

struct SlopeFit {
  double s;
  double p;
  bool ridged;
};

SlopeFit slope_statistic(const std::vector<double>& z, const std::vector<double>& member) {
  const Eigen::Index n = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = z[i];
    y(i) = member[i];
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  GlmFit fit = fit_logistic_glm_guarded(x, y, ones);
  const double se = std::sqrt(std::max(fit.covariance(1, 1), 1e-300));
  SlopeFit out;
  out.s = fit.beta(1) / se;
  out.p = 2.0 * norm_cdf(-std::fabs(out.s));
  out.ridged = fit.ridged;
  return out;
}

}  // namespace

EnrichmentResult enrichment_slope_test(const Dataset& ds, const std::string& set_label,
                                       bool side_split) {
  std::vector<double> z, member;
  z.reserve(ds.size());
  member.reserve(ds.size());
  std::size_t n_a = 0;
  for (const auto& c : ds.cases()) {
    const bool in = c.class_label && *c.class_label == set_label;
    z.push_back(c.z);
    member.push_back(in ? 1.0 : 0.0);
    if (in) ++n_a;
  }
  if (n_a < 5) throw DataError("enrichment_slope_test: set needs at least 5 members");
  if (n_a == ds.size()) throw DataError("enrichment_slope_test: complement is empty");

  EnrichmentResult res;
  res.set_label = set_label;
  res.n_a = n_a;
  const SlopeFit whole = slope_statistic(z, member);
  res.s = whole.s;
  res.p_two_sided = whole.p;
  res.ridged = whole.ridged;

  if (side_split) {
    std::vector<double> zp, mp, zn, mn;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] > 0.0) {
        zp.push_back(z[i]);
        mp.push_back(member[i]);
      } else if (z[i] < 0.0) {
        zn.push_back(z[i]);
        mn.push_back(member[i]);
      }
    }
    auto side = [](const std::vector<double>& zz, const std::vector<double>& mm)
        -> std::optional<SlopeFit> {
      double members = 0.0;
      for (double m : mm) members += m;
      if (zz.size() < 10 || members < 3.0 || members == static_cast<double>(zz.size()))
        return std::nullopt;
      return slope_statistic(zz, mm);
    };
    if (auto sp = side(zp, mp)) {
      res.s_pos = sp->s;
      res.p_pos = sp->p;
    }
    if (auto sn = side(zn, mn)) {
      res.s_neg = sn->s;
      res.p_neg = sn->p;
    }
  }
  return res;
}

EnrichmentResult enrichment_fdr_report(const Dataset& ds, const std::string& set_label,
                                       const FdrCurve& fdr,
                                       std::optional<EnrichmentResult> base) {
  EnrichmentResult res = base ? std::move(*base) : enrichment_slope_test(ds, set_label);

  const ClassPartition part = partition_by_class(ds, set_label);
  const BinSpec spec = fdr.density ? fdr.density->spec() : BinSpec::for_data(ds.z_values());
  const BinnedCounts bc = bin_counts(ds, spec, set_label);
  const ClassProbCurve pa = fit_class_prob_curve(bc);

  // constant null class probability pi_A0 = pi_A
  res.per_case_fdr_a.clear();
  res.n_below_threshold = 0;
  for (std::size_t i : part.indices_a) {
    const Case& c = ds.at(i);
    const double pi_hat = std::max(pa.prob(c.z), 1e-6);
    const double value = std::min(1.0, fdr.fdr_at(c.z) * part.pi_a / pi_hat);
    res.per_case_fdr_a[c.id] = value;
    if (value < 0.10) ++res.n_below_threshold;
  }
  res.n_a = part.indices_a.size();
  res.set_label = set_label;
  return res;
}

}  // namespace covfdr
