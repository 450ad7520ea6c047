#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"
#include "covfdr/enrichment.hpp"
#include "covfdr/fdr.hpp"
#include "covfdr/io.hpp"
#include "covfdr/separate.hpp"
#include "covfdr/simulate.hpp"
#include "covfdr/stats.hpp"

namespace fs = std::filesystem;
using namespace covfdr;

namespace {

struct GlobalOpts {
  AnalysisConfig cfg;
  std::string direction = "two-sided";
};

Direction parse_direction(const std::string& d) {
  if (d == "left") return Direction::left;
  if (d == "right") return Direction::right;
  if (d == "two-sided") return Direction::two_sided;
  throw DataError("unknown direction: " + d);
}

BinSpec make_bin_spec(const AnalysisConfig& cfg, const Dataset& ds) {
  if (cfg.bin_lo && cfg.bin_hi && cfg.bin_count) {
    BinSpec spec;
    spec.lo = *cfg.bin_lo;
    spec.hi = *cfg.bin_hi;
    spec.k = *cfg.bin_count;
    return spec;
  }
  return BinSpec::for_data(ds.z_values());
}

DensityFitConfig make_density_cfg(const AnalysisConfig& cfg) {
  DensityFitConfig dcfg;
  dcfg.basis = cfg.density_basis == "polynomial" ? DensityBasisKind::polynomial
                                                 : DensityBasisKind::natural_spline;
  dcfg.df = cfg.density_df;
  return dcfg;
}

NullEstimate make_null(const AnalysisConfig& cfg, const Dataset& ds) {
  if (cfg.null_mode == "theoretical") return NullEstimate::theoretical();
  EmpiricalNullConfig ncfg;
  ncfg.central_fraction = cfg.central_fraction;
  return fit_empirical_null(ds, ncfg);
}

Correction parse_correction(const std::string& c) {
  if (c == "none") return Correction::none;
  if (c == "plug-in-zero") return Correction::plug_in_zero;
  if (c == "pa0-hat") return Correction::pa0_hat;
  throw DataError("unknown correction mode: " + c);
}

LogitBasis parse_logit_basis(const std::string& b) {
  return b == "flat-interval" ? LogitBasis::flat_interval : LogitBasis::cubic;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void ensure_outdir(const AnalysisConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw DataError("cannot create output dir: " + cfg.output_dir);
}

std::string outpath(const AnalysisConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

std::map<std::string, std::string> null_diags(const NullEstimate& ne) {
  return {{"null_source", ne.source == NullEstimate::Source::theoretical ? "theoretical"
                                                                         : "empirical_mle"},
          {"delta0", fmt(ne.delta0)},
          {"sigma0", fmt(ne.sigma0)},
          {"p0", fmt(ne.p0)}};
}

int run_fit(GlobalOpts& g) {
  g.cfg.validate();
  ensure_outdir(g.cfg);
  const Dataset ds = load_table(g.cfg.input_path, g.cfg);
  const BinSpec spec = make_bin_spec(g.cfg, ds);
  const BinnedCounts bc = bin_counts(ds, spec);
  const DensityFit density = fit_mixture_density(bc, make_density_cfg(g.cfg));
  const NullEstimate ne = make_null(g.cfg, ds);
  const FdrCurve curve = local_fdr_curve(ne, density);
  const Direction dir = parse_direction(g.direction);
  const RejectionSet rejections = bh_reject(ds, ne, g.cfg.q, dir);

  Table cases;
  {
    std::vector<std::string> ids;
    std::vector<double> z, fdr_i, fdr_left, fdr_right, rejected;
    std::vector<char> flag(ds.size(), 0);
    for (std::size_t i : rejections.rejected_indices) flag[i] = 1;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const Case& c = ds.at(i);
      ids.push_back(c.id);
      z.push_back(c.z);
      fdr_i.push_back(curve.fdr_at(c.z));
      const auto nv = null_density_eval(ne, c.z);
      fdr_left.push_back(tail_fdr_value(ne.p0, nv.big_f0, std::max(density.cdf(c.z), 1e-12)));
      fdr_right.push_back(
          tail_fdr_value(ne.p0, 1.0 - nv.big_f0, std::max(1.0 - density.cdf(c.z), 1e-12)));
      rejected.push_back(flag[i]);
    }
    cases.add_text("id", ids);
    cases.add_numeric("z", z);
    cases.add_numeric("fdr", fdr_i);
    cases.add_numeric("Fdr_left", fdr_left);
    cases.add_numeric("Fdr_right", fdr_right);
    cases.add_numeric("bh_rejected", rejected);
    write_csv(outpath(g.cfg, "case_table.csv"), cases);
  }
  {
    Table curve_table;
    curve_table.add_numeric("z", curve.grid);
    curve_table.add_numeric("f", curve.f);
    curve_table.add_numeric("f0", curve.f0);
    curve_table.add_numeric("fdr", curve.fdr);
    curve_table.add_numeric("Fdr_left", curve.fdr_left);
    curve_table.add_numeric("Fdr_right", curve.fdr_right);
    write_csv(outpath(g.cfg, "curve_table.csv"), curve_table);
  }

  auto diags = null_diags(ne);
  diags["n"] = std::to_string(ds.size());
  diags["bh_rejections"] = std::to_string(rejections.size());
  diags["bh_threshold_z"] = fmt(rejections.threshold_z);
  diags["density_iterations"] = std::to_string(density.iterations());
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg, diags);

  std::cout << "N=" << ds.size() << "  null(delta0=" << fmt(ne.delta0)
            << ", sigma0=" << fmt(ne.sigma0) << ", p0=" << fmt(ne.p0) << ")\n"
            << "BH(q=" << g.cfg.q << ", " << g.direction << "): " << rejections.size()
            << " rejections";
  if (!rejections.rejected_indices.empty())
    std::cout << ", threshold z = " << fmt(rejections.threshold_z);
  std::cout << "\nwrote " << outpath(g.cfg, "case_table.csv") << ", curve_table.csv, manifest.json\n";
  return 0;
}

int run_separate(GlobalOpts& g, std::string label) {
  g.cfg.validate();
  if (!g.cfg.class_column) throw DataError("separate: --class-column is required");
  ensure_outdir(g.cfg);
  const Dataset ds = load_table(g.cfg.input_path, g.cfg);
  const auto labels = ds.label_set();
  if (labels.size() < 2) throw DataError("separate: need at least two class labels");
  if (label.empty()) label = labels.front();

  const ClassPartition part = partition_by_class(ds, label);
  const BinSpec spec = make_bin_spec(g.cfg, ds);
  const BinnedCounts bc = bin_counts(ds, spec, label);
  const DensityFit density = fit_mixture_density(bc, make_density_cfg(g.cfg));
  const NullEstimate ne = make_null(g.cfg, ds);
  const FdrCurve curve = local_fdr_curve(ne, density);

  // class-wise empirical nulls
  std::vector<double> z_a, z_b;
  for (std::size_t i : part.indices_a) z_a.push_back(ds.at(i).z);
  for (std::size_t i : part.indices_b) z_b.push_back(ds.at(i).z);
  EmpiricalNullConfig ncfg;
  ncfg.central_fraction = g.cfg.central_fraction;
  const NullEstimate null_a = fit_empirical_null(z_a, ncfg);
  const NullEstimate null_b = fit_empirical_null(z_b, ncfg);

  const ClassProbCurve pa = fit_class_prob_curve(bc, parse_logit_basis(g.cfg.basis));
  const NullClassProb pa0 = NullClassProb::parametric(null_a, null_b, part.pi_a);

  std::vector<double> a_z = z_a;
  const SubclassFdrReport report =
      subclass_fdr_curve(curve, pa, pa0, parse_correction(g.cfg.correction), a_z);
  const TailFdrReport tail = subclass_tail_fdr(curve, pa, pa0, Direction::right);
  const FlatnessReport flat = null_flatness_diagnostic(pa);

  {
    Table t;
    t.add_text("class", {label, "other"});
    t.add_numeric("p0", {null_a.p0, null_b.p0});
    t.add_numeric("delta0", {null_a.delta0, null_b.delta0});
    t.add_numeric("sigma0", {null_a.sigma0, null_b.sigma0});
    t.add_numeric("pi", {part.pi_a, part.pi_b});
    write_csv(outpath(g.cfg, "class_nulls.csv"), t);
  }
  {
    Table t;
    t.add_numeric("z", report.grid);
    t.add_numeric("f", curve.f);
    t.add_numeric("f0", curve.f0);
    t.add_numeric("fdr", report.fdr_combined);
    std::vector<double> pia, pia0;
    for (double z : report.grid) {
      pia.push_back(pa.prob(z));
      pia0.push_back(pa0(z));
    }
    t.add_numeric("piA", pia);
    t.add_numeric("piA0", pia0);
    t.add_numeric("RA", report.r_a);
    t.add_numeric("fdrA", report.fdr_a);
    t.add_numeric("Fdr_right", curve.fdr_right);
    t.add_numeric("RA_tail_right", tail.r_a_tail);
    t.add_numeric("FdrA_right", tail.fdr_a_tail);
    if (!report.sd_log_fdr.empty()) {
      t.add_numeric("sd_log_fdr", report.sd_log_fdr);
      t.add_numeric("sd_log_RA", report.sd_log_r_a);
      t.add_numeric("sd_log_fdrA", report.sd_log_fdr_a);
    }
    write_csv(outpath(g.cfg, "curve_table.csv"), t);
  }
  {
    Table t;
    std::vector<std::string> ids, cls;
    std::vector<double> z, fdr_i, fdr_class;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const Case& c = ds.at(i);
      ids.push_back(c.id);
      cls.push_back(c.class_label.value_or(""));
      z.push_back(c.z);
      const double f_i = curve.fdr_at(c.z);
      fdr_i.push_back(f_i);
      const bool in_a = c.class_label && *c.class_label == label;
      const double pia_z = std::clamp(pa.prob(c.z), 1e-6, 1.0 - 1e-6);
      const double ratio = in_a ? pa0(c.z) / pia_z : (1.0 - pa0(c.z)) / (1.0 - pia_z);
      fdr_class.push_back(std::min(1.0, f_i * ratio));
    }
    t.add_text("id", ids);
    t.add_text("class", cls);
    t.add_numeric("z", z);
    t.add_numeric("fdr", fdr_i);
    t.add_numeric("fdr_class", fdr_class);
    write_csv(outpath(g.cfg, "case_table.csv"), t);
  }

  auto diags = null_diags(ne);
  diags["label_A"] = label;
  diags["pi_A"] = fmt(part.pi_a);
  diags["flatness_mean_slope"] = fmt(flat.mean_slope);
  diags["flatness_flat"] = flat.flat ? "true" : "false";
  diags["logistic_ridged"] = pa.ridged() ? "true" : "false";
  if (report.p_a0_hat) diags["p_A0_hat"] = fmt(*report.p_a0_hat);
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg, diags);

  std::cout << "class " << label << ": pi_A=" << fmt(part.pi_a) << "  null_A(p0="
            << fmt(null_a.p0) << ", delta0=" << fmt(null_a.delta0) << ", sigma0="
            << fmt(null_a.sigma0) << ")  null_B(p0=" << fmt(null_b.p0) << ", delta0="
            << fmt(null_b.delta0) << ", sigma0=" << fmt(null_b.sigma0) << ")\n"
            << "flatness near 0: mean slope " << fmt(flat.mean_slope) << " (se "
            << fmt(flat.mean_slope_se) << ") -> " << (flat.flat ? "flat" : "NOT flat")
            << "\nwrote class_nulls.csv, curve_table.csv, case_table.csv, manifest.json\n";
  return 0;
}

int run_subclass(GlobalOpts& g) {
  g.cfg.validate();
  if (!g.cfg.set_file) throw DataError("subclass: --set is required");
  ensure_outdir(g.cfg);
  Dataset base = load_table(g.cfg.input_path, g.cfg);
  const auto sets = load_gene_sets(*g.cfg.set_file);

  for (const auto& [name, ids] : sets) {
    const Dataset ds = apply_set_labels(base, ids, name);
    const ClassPartition part = partition_by_class(ds, name);
    const BinSpec spec = make_bin_spec(g.cfg, ds);
    const BinnedCounts bc = bin_counts(ds, spec, name);
    const DensityFit density = fit_mixture_density(bc, make_density_cfg(g.cfg));
    const NullEstimate ne = make_null(g.cfg, ds);
    const FdrCurve curve = local_fdr_curve(ne, density);
    const ClassProbCurve pa = fit_class_prob_curve(bc, parse_logit_basis(g.cfg.basis));
    const NullClassProb pa0 = NullClassProb::constant(part.pi_a);

    std::vector<double> a_z;
    for (std::size_t i : part.indices_a) a_z.push_back(ds.at(i).z);
    const SubclassFdrReport report =
        subclass_fdr_curve(curve, pa, pa0, parse_correction(g.cfg.correction), a_z);
    const FlatnessReport flat = null_flatness_diagnostic(pa);

    Table t;
    t.add_numeric("z", report.grid);
    t.add_numeric("fdr", report.fdr_combined);
    std::vector<double> pia;
    for (double z : report.grid) pia.push_back(pa.prob(z));
    t.add_numeric("piA", pia);
    t.add_numeric("RA", report.r_a);
    t.add_numeric("fdrA", report.fdr_a);
    if (!report.sd_log_fdr.empty()) {
      t.add_numeric("sd_log_fdr", report.sd_log_fdr);
      t.add_numeric("sd_log_RA", report.sd_log_r_a);
      t.add_numeric("sd_log_fdrA", report.sd_log_fdr_a);
    }
    write_csv(outpath(g.cfg, "subclass_" + name + "_curves.csv"), t);

    Table members;
    std::vector<std::string> mids;
    std::vector<double> mz, mfdr, mfdra;
    for (std::size_t i : part.indices_a) {
      const Case& c = ds.at(i);
      mids.push_back(c.id);
      mz.push_back(c.z);
      mfdr.push_back(curve.fdr_at(c.z));
      const double pia_z = std::max(pa.prob(c.z), 1e-6);
      mfdra.push_back(std::min(1.0, curve.fdr_at(c.z) * part.pi_a / pia_z));
    }
    members.add_text("id", mids);
    members.add_numeric("z", mz);
    members.add_numeric("fdr", mfdr);
    members.add_numeric("fdrA", mfdra);
    write_csv(outpath(g.cfg, "subclass_" + name + "_members.csv"), members);

    std::cout << "set " << name << ": N_A=" << part.indices_a.size()
              << " pi_A=" << fmt(part.pi_a) << "  flat-near-0: " << (flat.flat ? "yes" : "NO");
    if (report.p_a0_hat) std::cout << "  p_A0_hat=" << fmt(*report.p_a0_hat);
    std::cout << "\n";
  }

  auto diags = std::map<std::string, std::string>{{"sets", std::to_string(sets.size())}};
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg, diags);
  return 0;
}

int run_enrich(GlobalOpts& g, bool side_split, bool bh_across_sets) {
  g.cfg.validate();
  if (!g.cfg.set_file) throw DataError("enrich: --set is required");
  ensure_outdir(g.cfg);
  Dataset base = load_table(g.cfg.input_path, g.cfg);
  const auto sets = load_gene_sets(*g.cfg.set_file);

  const BinSpec spec = make_bin_spec(g.cfg, base);
  const BinnedCounts bc = bin_counts(base, spec);
  const DensityFit density = fit_mixture_density(bc, make_density_cfg(g.cfg));
  const NullEstimate ne = make_null(g.cfg, base);
  const FdrCurve curve = local_fdr_curve(ne, density);

  std::vector<std::string> names;
  std::vector<double> n_a, s_stat, p_val, s_pos, s_neg, below;
  Table members;
  std::vector<std::string> m_set, m_id;
  std::vector<double> m_z, m_fdra;

  for (const auto& [name, ids] : sets) {
    const Dataset ds = apply_set_labels(base, ids, name);
    EnrichmentResult res = enrichment_slope_test(ds, name, side_split);
    res = enrichment_fdr_report(ds, name, curve, res);
    names.push_back(name);
    n_a.push_back(static_cast<double>(res.n_a));
    s_stat.push_back(res.s);
    p_val.push_back(res.p_two_sided);
    s_pos.push_back(res.s_pos.value_or(std::numeric_limits<double>::quiet_NaN()));
    s_neg.push_back(res.s_neg.value_or(std::numeric_limits<double>::quiet_NaN()));
    below.push_back(static_cast<double>(res.n_below_threshold));
    for (const auto& [id, v] : res.per_case_fdr_a) {
      m_set.push_back(name);
      m_id.push_back(id);
      for (const auto& c : ds.cases())
        if (c.id == id) {
          m_z.push_back(c.z);
          break;
        }
      m_fdra.push_back(v);
    }
    std::cout << "set " << name << ": N_A=" << res.n_a << "  S=" << fmt(res.s)
              << "  p=" << fmt(res.p_two_sided);
    if (res.s_pos) std::cout << "  S_pos=" << fmt(*res.s_pos);
    if (res.s_neg) std::cout << "  S_neg=" << fmt(*res.s_neg);
    std::cout << "  members_fdrA<0.1: " << res.n_below_threshold << "\n";
  }

  Table t;
  t.add_text("set", names);
  t.add_numeric("N_A", n_a);
  t.add_numeric("S", s_stat);
  t.add_numeric("p_two_sided", p_val);
  if (side_split) {
    t.add_numeric("S_pos", s_pos);
    t.add_numeric("S_neg", s_neg);
  }
  t.add_numeric("n_fdrA_below_0.1", below);
  if (bh_across_sets) {
    // BH pass across the sets' p-values
    std::vector<double> flags(names.size(), 0.0);
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_val[a] < p_val[b]; });
    std::size_t cutoff = 0;
    for (std::size_t i = names.size(); i-- > 0;)
      if (p_val[order[i]] <=
          (static_cast<double>(i + 1) * g.cfg.q) / static_cast<double>(names.size())) {
        cutoff = i + 1;
        break;
      }
    for (std::size_t i = 0; i < cutoff; ++i) flags[order[i]] = 1.0;
    t.add_numeric("bh_enriched", flags);
  }
  write_csv(outpath(g.cfg, "enrichment.csv"), t);

  members.add_text("set", m_set);
  members.add_text("id", m_id);
  members.add_numeric("z", m_z);
  members.add_numeric("fdrA", m_fdra);
  write_csv(outpath(g.cfg, "enrichment_members.csv"), members);

  auto diags = null_diags(ne);
  diags["sets"] = std::to_string(sets.size());
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg, diags);
  return 0;
}

int run_relevance(GlobalOpts& g, const std::string& covariate, double scale,
                  const std::string& focal_id) {
  g.cfg.validate();
  if (covariate.empty()) throw DataError("relevance: --covariate is required");
  ensure_outdir(g.cfg);
  const Dataset ds = load_table(g.cfg.input_path, g.cfg);
  const NullEstimate ne = make_null(g.cfg, ds);
  const RelevanceFunction rho = RelevanceFunction::kernel(covariate, scale);
  const Direction dir = g.direction == "left" ? Direction::left : Direction::right;

  Table t;
  std::vector<std::string> ids;
  std::vector<double> zs, xs, fdr_bar, r_bar, fdr_bar_i;

  if (!focal_id.empty()) {
    std::optional<std::size_t> focal;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.at(i).id == focal_id) focal = i;
    if (!focal) throw DataError("relevance: focal id not found: " + focal_id);
    for (double z = -4.0; z <= 4.0 + 1e-9; z += 0.1) {
      const RelevanceFdrValue v = relevance_weighted_fdr(ds, *focal, rho, ne, z, dir);
      ids.push_back(focal_id);
      zs.push_back(z);
      xs.push_back(ds.covariate(*focal, covariate));
      fdr_bar.push_back(v.fdr_bar);
      r_bar.push_back(v.r_bar);
      fdr_bar_i.push_back(v.fdr_bar_i);
    }
  } else {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const Case& c = ds.at(i);
      const RelevanceFdrValue v = relevance_weighted_fdr(ds, i, rho, ne, c.z, dir);
      ids.push_back(c.id);
      zs.push_back(c.z);
      xs.push_back(ds.covariate(i, covariate));
      fdr_bar.push_back(v.fdr_bar);
      r_bar.push_back(v.r_bar);
      fdr_bar_i.push_back(v.fdr_bar_i);
    }
  }
  t.add_text("id", ids);
  t.add_numeric("z", zs);
  t.add_numeric(covariate, xs);
  t.add_numeric("Fdr_bar", fdr_bar);
  t.add_numeric("R_bar_i", r_bar);
  t.add_numeric("Fdr_bar_i", fdr_bar_i);
  write_csv(outpath(g.cfg, "relevance.csv"), t);

  auto diags = null_diags(ne);
  diags["kernel_scale"] = fmt(scale);
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg, diags);
  std::cout << "wrote " << outpath(g.cfg, "relevance.csv") << " (" << ids.size() << " rows)\n";
  return 0;
}

int run_adjust(GlobalOpts& g, const std::string& covariate, std::size_t window) {
  g.cfg.validate();
  if (covariate.empty()) throw DataError("adjust: --covariate is required");
  ensure_outdir(g.cfg);
  const Dataset ds = load_table(g.cfg.input_path, g.cfg);
  const Dataset adjusted = adjust_z_local(ds, covariate, window);

  Table t;
  std::vector<std::string> ids;
  std::vector<double> z_raw, z_adj, xs;
  for (std::size_t i = 0; i < adjusted.size(); ++i) {
    const Case& c = adjusted.at(i);
    ids.push_back(c.id);
    z_adj.push_back(c.z);
    z_raw.push_back(c.covariates.at("z_raw"));
    xs.push_back(c.covariates.at(covariate));
  }
  t.add_text("id", ids);
  t.add_numeric(covariate, xs);
  t.add_numeric("z_raw", z_raw);
  t.add_numeric("z_adjusted", z_adj);
  write_csv(outpath(g.cfg, "adjusted.csv"), t);
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg,
                 {{"window", std::to_string(window)}, {"covariate", covariate}});
  std::cout << "wrote " << outpath(g.cfg, "adjusted.csv") << "\n";
  return 0;
}

int run_simulate(GlobalOpts& g, const std::string& check, std::size_t reps,
                 TwoClassSimConfig sim_cfg, PoissonSimConfig pois_cfg) {
  ensure_outdir(g.cfg);
  sim_cfg.seed = g.cfg.seed;
  pois_cfg.seed = g.cfg.seed;
  std::map<std::string, std::string> diags;

  const bool all = check == "all";
  if (all || check == "replication") {
    SubclassStudyConfig study;
    study.reps = reps;
    const SubclassStudyResult res = replicate_subclass_study(sim_cfg, study);

    Table t;
    t.add_numeric("z", res.grid);
    t.add_numeric("sd_log_fdr", res.sd_log_fdr);
    t.add_numeric("sd_log_RA", res.sd_log_r_a);
    t.add_numeric("sd_log_fdrA", res.sd_log_fdr_a);
    t.add_numeric("mean_fdrA", res.mean_fdr_a);
    t.add_numeric("true_fdrA", res.true_fdr_a);
    t.add_numeric("delta_sd_log_fdr", res.mean_delta_sd_log_fdr);
    t.add_numeric("delta_sd_log_RA", res.mean_delta_sd_log_r_a);
    write_csv(outpath(g.cfg, "study_sd_curves.csv"), t);

    Table pa0;
    pa0.add_numeric("p_A0_hat", res.pa0_hats);
    write_csv(outpath(g.cfg, "study_pa0.csv"), pa0);

    std::size_t i25 = 0;
    for (std::size_t i = 0; i < res.grid.size(); ++i)
      if (std::fabs(res.grid[i] - 2.5) < std::fabs(res.grid[i25] - 2.5)) i25 = i;
    const double ratio = res.sd_log_fdr_a[i25] / res.sd_log_fdr[i25];
    std::cout << "replication study: reps=" << res.n_reps << " failures=" << res.n_failures
              << "\n  sd ratio at z=2.5: " << fmt(ratio)
              << "  (naive sqrt(1/pi_A) = " << fmt(1.0 / std::sqrt(sim_cfg.pi_a)) << ")\n"
              << "  p_A0_hat: mean=" << fmt(res.pa0_mean) << " sd=" << fmt(res.pa0_sd) << "\n";
    diags["ratio_z2.5"] = fmt(ratio);
    diags["pa0_mean"] = fmt(res.pa0_mean);
    diags["pa0_sd"] = fmt(res.pa0_sd);
    diags["failures"] = std::to_string(res.n_failures);
  }
  if (all || check == "poisson") {
    const PoissonCheckReport rep = poisson_model_checks(pois_cfg, std::max<std::size_t>(reps, 10000));
    std::cout << "poisson lemma: Fdr=" << fmt(rep.fdr) << " predicted E{Fdr_bar}="
              << fmt(rep.predicted_fdrbar) << "\n  mean Fdr_bar=" << fmt(rep.mean_fdrbar)
              << " (se " << fmt(rep.se_fdrbar) << ")  mean Fdp=" << fmt(rep.mean_fdp)
              << " (se " << fmt(rep.se_fdp) << ")\n";
    diags["poisson_mean_fdrbar"] = fmt(rep.mean_fdrbar);
    diags["poisson_mean_fdp"] = fmt(rep.mean_fdp);
  }
  if (all || check == "control") {
    const ControlCheckReport rep = combined_control_check(sim_cfg, g.cfg.q, std::max<std::size_t>(reps, 500));
    std::cout << "combined control (per-class BH, q=" << g.cfg.q
              << "): mean Fdp_comb=" << fmt(rep.mean_fdp_comb) << " (MC se " << fmt(rep.mc_se)
              << "), mean rejections=" << fmt(rep.mean_rejections) << "\n";
    diags["control_mean_fdp"] = fmt(rep.mean_fdp_comb);
    diags["control_mc_se"] = fmt(rep.mc_se);
  }
  if (all || check == "jensen") {
    const TwoClassOracle oracle(sim_cfg);
    std::vector<double> grid;
    for (double z = -4.0; z <= 4.0 + 1e-9; z += 0.1) grid.push_back(z);
    const JensenReport rv = jensen_information_check(oracle, QLoss::variance, grid);
    const JensenReport re = jensen_information_check(oracle, QLoss::entropy, grid);
    std::cout << "jensen inequality: variance-loss "
              << (rv.holds ? "holds" : "VIOLATED") << " (min margin " << fmt(rv.min_margin)
              << "), entropy-loss " << (re.holds ? "holds" : "VIOLATED") << " (min margin "
              << fmt(re.min_margin) << ")\n";
    diags["jensen_variance"] = rv.holds ? "holds" : "violated";
    diags["jensen_entropy"] = re.holds ? "holds" : "violated";
  }
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg, diags);
  return 0;
}

int run_diagnose(GlobalOpts& g, const std::string& label_arg) {
  g.cfg.validate();
  ensure_outdir(g.cfg);
  const Dataset ds = load_table(g.cfg.input_path, g.cfg);
  const NullEstimate ne = make_null(g.cfg, ds);

  // accuracy of Fdr-bar across tail sizes: where does e(z) fall below 10?
  std::vector<double> z_sorted = ds.z_values();
  std::sort(z_sorted.begin(), z_sorted.end());
  Table t;
  std::vector<double> zq, fq, eq, cv1, cvr;
  const std::size_t n = ds.size();
  for (double p : {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.10, 0.25, 0.50}) {
    const double z = quantile(z_sorted, p);
    const AccuracyReport rep = fdrbar_accuracy(n, p, z);
    zq.push_back(z);
    fq.push_back(p);
    eq.push_back(rep.e_z);
    cv1.push_back(rep.cv_first_order);
    cvr.push_back(rep.cv);
  }
  t.add_numeric("z", zq);
  t.add_numeric("F", fq);
  t.add_numeric("e", eq);
  t.add_numeric("CV_first_order", cv1);
  t.add_numeric("CV", cvr);
  write_csv(outpath(g.cfg, "accuracy.csv"), t);

  std::cout << "null: delta0=" << fmt(ne.delta0) << " sigma0=" << fmt(ne.sigma0)
            << " p0=" << fmt(ne.p0) << "\n";
  const double f10 = 10.0 / static_cast<double>(n);
  if (f10 < 1.0)
    std::cout << "e(z) >= 10 (CV <= ~0.3) holds for left-tail F(z) >= " << fmt(f10)
              << " (z >= " << fmt(quantile(z_sorted, f10)) << ")\n";

  auto diags = null_diags(ne);
  if (g.cfg.class_column) {
    const auto labels = ds.label_set();
    if (!labels.empty()) {
      const std::string label = label_arg.empty() ? labels.front() : label_arg;
      const BinSpec spec = make_bin_spec(g.cfg, ds);
      const BinnedCounts bc = bin_counts(ds, spec, label);
      const ClassProbCurve pa = fit_class_prob_curve(bc, parse_logit_basis(g.cfg.basis));
      const FlatnessReport flat = null_flatness_diagnostic(pa);
      std::cout << "flatness (class " << label << "): mean slope " << fmt(flat.mean_slope)
                << " (se " << fmt(flat.mean_slope_se) << "), max |slope| "
                << fmt(flat.max_abs_logit_slope) << " -> "
                << (flat.flat ? "consistent with shared nulls"
                              : "evidence AGAINST shared class nulls")
                << "\n";
      diags["flatness_flat"] = flat.flat ? "true" : "false";
      diags["flatness_mean_slope"] = fmt(flat.mean_slope);
    }
  }
  write_manifest(outpath(g.cfg, "manifest.json"), g.cfg, diags);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covfdr: combined and separate-class false discovery rate analysis"};
  app.require_subcommand(1);

  GlobalOpts g;

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input)
      sub->add_option("input", g.cfg.input_path, "input CSV/TSV table")->required();
    sub->add_option("--q", g.cfg.q, "FDR control level");
    sub->add_option("--null", g.cfg.null_mode, "null mode: theoretical|empirical");
    sub->add_option("--seed", g.cfg.seed, "RNG seed (COVFDR_SEED overrides)");
    sub->add_option("--bins", g.cfg.bin_count, "bin count override");
    sub->add_option("--bin-lo", g.cfg.bin_lo, "bin range lower edge");
    sub->add_option("--bin-hi", g.cfg.bin_hi, "bin range upper edge");
    sub->add_option("--basis", g.cfg.basis, "logit basis: cubic|flat-interval");
    sub->add_option("--correction", g.cfg.correction, "none|plug-in-zero|pa0-hat");
    sub->add_option("--out", g.cfg.output_dir, "output directory");
    sub->add_option("--z-column", g.cfg.z_column, "z-value column name");
    sub->add_option("--central-fraction", g.cfg.central_fraction,
                    "central window fraction for the empirical null");
    sub->add_option("--density-df", g.cfg.density_df, "density fit degrees of freedom");
    sub->add_option("--density-basis", g.cfg.density_basis,
                    "density basis: spline|polynomial");
  };

  // fit
  auto* fit = app.add_subcommand("fit", "combined fdr analysis with BH rejections");
  add_common(fit, true);
  fit->add_option("--direction", g.direction, "left|right|two-sided");

  // separate
  auto* sep = app.add_subcommand("separate", "two-class separate analysis");
  add_common(sep, true);
  std::string sep_label;
  sep->add_option("--class-column", g.cfg.class_column, "class label column")->required();
  sep->add_option("--label", sep_label, "class A label (default: first seen)");

  // subclass
  auto* sub = app.add_subcommand("subclass", "theorem-route fdr for small case sets");
  add_common(sub, true);
  sub->add_option("--set", g.cfg.set_file, "set file: NAME<TAB>id1,id2,...")->required();

  // enrich
  auto* enr = app.add_subcommand("enrich", "enrichment slope test for case sets");
  add_common(enr, true);
  enr->add_option("--set", g.cfg.set_file, "set file: NAME<TAB>id1,id2,...")->required();
  bool side_split = false, bh_sets = false;
  enr->add_flag("--side-split", side_split, "compute S separately for z<0 and z>0");
  enr->add_flag("--bh-across-sets", bh_sets, "BH pass across set p-values at q");

  // relevance
  auto* rel = app.add_subcommand("relevance", "relevance-weighted tail Fdr (kernel mode)");
  add_common(rel, true);
  std::string rel_cov, rel_focal;
  double rel_scale = 10.0;
  rel->add_option("--covariate", rel_cov, "covariate for the kernel")->required();
  rel->add_option("--scale", rel_scale, "kernel scale (default 10)");
  rel->add_option("--focal", rel_focal, "focal case id (curve mode)");
  rel->add_option("--direction", g.direction, "left|right");

  // adjust
  auto* adj = app.add_subcommand("adjust", "local median/spread z adjustment");
  add_common(adj, true);
  std::string adj_cov;
  std::size_t adj_window = 200;
  adj->add_option("--covariate", adj_cov, "ordering covariate")->required();
  adj->add_option("--window", adj_window, "window size (nearest cases)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "two-class simulation studies and checks");
  std::string preset = "eq75", check = "replication";
  std::size_t reps = 100;
  TwoClassSimConfig sim_cfg;
  PoissonSimConfig pois_cfg;
  sim->add_option("--preset", preset, "simulation preset (eq75)");
  sim->add_option("--reps", reps, "replications");
  sim->add_option("--check", check, "replication|poisson|control|jensen|all");
  sim->add_option("--n", sim_cfg.n, "cases per replication");
  sim->add_option("--pi-a", sim_cfg.pi_a, "class A prior probability");
  sim->add_option("--p-a0", sim_cfg.p_a0, "null rate in class A");
  sim->add_option("--p-b0", sim_cfg.p_b0, "null rate in class B");
  sim->add_option("--e0", pois_cfg.e0, "poisson check: expected null count");
  sim->add_option("--e1", pois_cfg.e1, "poisson check: expected nonnull count");
  sim->add_option("--mu", pois_cfg.mu, "poisson check: expected total N");
  sim->add_option("--q", g.cfg.q, "control level for the control check");
  sim->add_option("--seed", g.cfg.seed, "RNG seed (COVFDR_SEED overrides)");
  sim->add_option("--out", g.cfg.output_dir, "output directory");

  // diagnose
  auto* dia = app.add_subcommand("diagnose", "flatness and accuracy diagnostics");
  add_common(dia, true);
  std::string dia_label;
  dia->add_option("--class-column", g.cfg.class_column, "class label column");
  dia->add_option("--label", dia_label, "class A label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  // the environment takes precedence over any configured seed
  if (const char* env_seed = std::getenv("COVFDR_SEED")) {
    g.cfg.seed = std::strtoull(env_seed, nullptr, 10);
  }

  try {
    if (*fit) return run_fit(g);
    if (*sep) return run_separate(g, sep_label);
    if (*sub) return run_subclass(g);
    if (*enr) return run_enrich(g, side_split, bh_sets);
    if (*rel) return run_relevance(g, rel_cov, rel_scale, rel_focal);
    if (*adj) return run_adjust(g, adj_cov, adj_window);
    if (*sim) {
      if (preset != "eq75") throw DataError("unknown preset: " + preset);
      return run_simulate(g, check, reps, sim_cfg, pois_cfg);
    }
    if (*dia) return run_diagnose(g, dia_label);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
