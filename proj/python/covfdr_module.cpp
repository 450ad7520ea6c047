#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covfdr/core.hpp"
#include "covfdr/density.hpp"
#include "covfdr/enrichment.hpp"
#include "covfdr/fdr.hpp"
#include "covfdr/io.hpp"
#include "covfdr/separate.hpp"
#include "covfdr/simulate.hpp"
#include "covfdr/stats.hpp"

namespace py = pybind11;
using namespace covfdr;

namespace {

Dataset dataset_from_columns(const std::vector<double>& z,
                             const std::vector<std::string>& ids,
                             const std::vector<std::string>& labels) {
  std::vector<Case> cases(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    cases[i].z = z[i];
    cases[i].id = i < ids.size() ? ids[i] : "case-" + std::to_string(i + 1);
    if (i < labels.size() && !labels[i].empty()) cases[i].class_label = labels[i];
  }
  return validate_dataset(Dataset(std::move(cases)));
}

Direction parse_dir(const std::string& d) {
  if (d == "left") return Direction::left;
  if (d == "right") return Direction::right;
  if (d == "two-sided" || d == "two_sided") return Direction::two_sided;
  throw DataError("unknown direction: " + d);
}

}  // namespace

PYBIND11_MODULE(_covfdr, m) {
  m.doc() = "Combined and separate-class false discovery rate analysis";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<FitError>(m, "FitError");

  py::class_<Case>(m, "Case")
      .def(py::init<>())
      .def_readwrite("id", &Case::id)
      .def_readwrite("z", &Case::z)
      .def_readwrite("covariates", &Case::covariates)
      .def_readwrite("class_label", &Case::class_label)
      .def_readwrite("is_null_truth", &Case::is_null_truth);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<std::vector<Case>>())
      .def("__len__", &Dataset::size)
      .def("z_values", &Dataset::z_values)
      .def("label_set", &Dataset::label_set)
      .def("case", &Dataset::at, py::return_value_policy::reference_internal)
      .def("ids",
           [](const Dataset& ds) {
             std::vector<std::string> ids;
             for (const auto& c : ds.cases()) ids.push_back(c.id);
             return ids;
           })
      .def("labels",
           [](const Dataset& ds) {
             std::vector<std::string> out;
             for (const auto& c : ds.cases()) out.push_back(c.class_label.value_or(""));
             return out;
           })
      .def("null_truth", [](const Dataset& ds) {
        std::vector<bool> out;
        for (const auto& c : ds.cases()) out.push_back(c.is_null_truth.value_or(false));
        return out;
      });

  m.def("dataset", &dataset_from_columns, py::arg("z"),
        py::arg("ids") = std::vector<std::string>{},
        py::arg("labels") = std::vector<std::string>{},
        "Build a validated dataset from parallel columns");
  m.def("validate_dataset", &validate_dataset);

  py::class_<ClassPartition>(m, "ClassPartition")
      .def_readonly("label_a", &ClassPartition::label_a)
      .def_readonly("indices_a", &ClassPartition::indices_a)
      .def_readonly("indices_b", &ClassPartition::indices_b)
      .def_readonly("pi_a", &ClassPartition::pi_a)
      .def_readonly("pi_b", &ClassPartition::pi_b);
  m.def("partition_by_class", &partition_by_class);

  py::class_<BinSpec>(m, "BinSpec")
      .def(py::init([](double lo, double hi, int k) { return BinSpec{lo, hi, k}; }),
           py::arg("lo"), py::arg("hi"), py::arg("k"))
      .def_readonly("lo", &BinSpec::lo)
      .def_readonly("hi", &BinSpec::hi)
      .def_readonly("k", &BinSpec::k)
      .def("width", &BinSpec::width)
      .def("midpoints", &BinSpec::midpoints)
      .def_static("for_data", [](const std::vector<double>& z) { return BinSpec::for_data(z); });

  py::class_<BinnedCounts>(m, "BinnedCounts")
      .def_readonly("spec", &BinnedCounts::spec)
      .def_readonly("counts", &BinnedCounts::counts)
      .def_readonly("class_counts", &BinnedCounts::class_counts)
      .def("total", &BinnedCounts::total)
      .def("class_proportions", &BinnedCounts::class_proportions);

  m.def(
      "bin_counts",
      [](const Dataset& ds, const BinSpec& spec, const std::optional<std::string>& label) {
        return bin_counts(ds, spec, label);
      },
      py::arg("dataset"), py::arg("spec"), py::arg("class_label") = std::nullopt);

  py::enum_<DensityBasisKind>(m, "DensityBasis")
      .value("natural_spline", DensityBasisKind::natural_spline)
      .value("polynomial", DensityBasisKind::polynomial);

  py::class_<DensityFit>(m, "DensityFit")
      .def("__call__", &DensityFit::density)
      .def("density", &DensityFit::density)
      .def("cdf", &DensityFit::cdf)
      .def("sd_log_density", &DensityFit::sd_log_density)
      .def_property_readonly("spec", &DensityFit::spec)
      .def_property_readonly("iterations", &DensityFit::iterations);

  m.def(
      "fit_mixture_density",
      [](const BinnedCounts& bc, int df, DensityBasisKind basis) {
        DensityFitConfig cfg;
        cfg.df = df;
        cfg.basis = basis;
        return fit_mixture_density(bc, cfg);
      },
      py::arg("binned"), py::arg("df") = 7,
      py::arg("basis") = DensityBasisKind::natural_spline);

  py::class_<NullEstimate>(m, "NullEstimate")
      .def_readonly("delta0", &NullEstimate::delta0)
      .def_readonly("sigma0", &NullEstimate::sigma0)
      .def_readonly("p0", &NullEstimate::p0)
      .def_property_readonly("source",
                             [](const NullEstimate& ne) {
                               return ne.source == NullEstimate::Source::theoretical
                                          ? "theoretical"
                                          : "empirical_mle";
                             })
      .def_static("theoretical", &NullEstimate::theoretical);

  m.def(
      "fit_empirical_null",
      [](const std::vector<double>& z, double central_fraction) {
        EmpiricalNullConfig cfg;
        cfg.central_fraction = central_fraction;
        return fit_empirical_null(z, cfg);
      },
      py::arg("z"), py::arg("central_fraction") = 0.85);

  m.def("null_density_eval", [](const NullEstimate& ne, double z) {
    const auto v = null_density_eval(ne, z);
    return py::make_tuple(v.f0, v.big_f0);
  });

  py::class_<FdrCurve>(m, "FdrCurve")
      .def_readonly("grid", &FdrCurve::grid)
      .def_readonly("fdr", &FdrCurve::fdr)
      .def_readonly("fdr_raw", &FdrCurve::fdr_raw)
      .def_readonly("fdr_left", &FdrCurve::fdr_left)
      .def_readonly("fdr_right", &FdrCurve::fdr_right)
      .def_readonly("f", &FdrCurve::f)
      .def_readonly("f0", &FdrCurve::f0)
      .def_readonly("null_estimate", &FdrCurve::null_estimate)
      .def("fdr_at", &FdrCurve::fdr_at);

  m.def(
      "local_fdr_curve",
      [](const NullEstimate& ne, const DensityFit& density,
         const std::optional<std::vector<double>>& grid) {
        return grid ? local_fdr_curve(ne, density, *grid) : local_fdr_curve(ne, density);
      },
      py::arg("null"), py::arg("density"), py::arg("grid") = std::nullopt);

  py::class_<RejectionSet>(m, "RejectionSet")
      .def_readonly("level", &RejectionSet::level)
      .def_readonly("threshold_z", &RejectionSet::threshold_z)
      .def_readonly("threshold_p", &RejectionSet::threshold_p)
      .def_readonly("rejected_indices", &RejectionSet::rejected_indices)
      .def_readonly("rejected_ids", &RejectionSet::rejected_ids)
      .def("__len__", &RejectionSet::size);

  m.def(
      "bh_reject",
      [](const Dataset& ds, const NullEstimate& ne, double q, const std::string& dir) {
        return bh_reject(ds, ne, q, parse_dir(dir));
      },
      py::arg("dataset"), py::arg("null"), py::arg("q") = 0.1,
      py::arg("direction") = "right");
  m.def("bonferroni_reject",
        [](const std::vector<double>& p, double alpha) { return bonferroni_reject(p, alpha); });
  m.def("false_discovery_proportion", &false_discovery_proportion);

  py::class_<AccuracyReport>(m, "AccuracyReport")
      .def_readonly("z", &AccuracyReport::z)
      .def_readonly("n", &AccuracyReport::n)
      .def_readonly("f_z", &AccuracyReport::f_z)
      .def_readonly("e_z", &AccuracyReport::e_z)
      .def_readonly("d", &AccuracyReport::d)
      .def_readonly("c", &AccuracyReport::c)
      .def_readonly("mean_d", &AccuracyReport::mean_d)
      .def_readonly("var_d", &AccuracyReport::var_d)
      .def_readonly("cv", &AccuracyReport::cv)
      .def_readonly("cv_first_order", &AccuracyReport::cv_first_order);
  m.def("fdrbar_accuracy", &fdrbar_accuracy, py::arg("n"), py::arg("f_z"),
        py::arg("z") = std::numeric_limits<double>::quiet_NaN());

  py::enum_<LogitBasis>(m, "LogitBasis")
      .value("cubic", LogitBasis::cubic)
      .value("flat_interval", LogitBasis::flat_interval);

  py::class_<ClassProbCurve>(m, "ClassProbCurve")
      .def("__call__", &ClassProbCurve::prob)
      .def("prob", &ClassProbCurve::prob)
      .def("logit", &ClassProbCurve::logit)
      .def("logit_slope", &ClassProbCurve::logit_slope)
      .def("sd_logit", &ClassProbCurve::sd_logit)
      .def_property_readonly("ridged", &ClassProbCurve::ridged)
      .def_property_readonly("converged", &ClassProbCurve::converged);

  m.def(
      "fit_class_prob_curve",
      [](const BinnedCounts& bc, LogitBasis basis) { return fit_class_prob_curve(bc, basis); },
      py::arg("binned"), py::arg("basis") = LogitBasis::cubic);

  py::class_<NullClassProb>(m, "NullClassProb")
      .def("__call__", [](const NullClassProb& p, double z) { return p(z); })
      .def_static("constant", &NullClassProb::constant)
      .def_static("from_rates", &NullClassProb::from_rates)
      .def_static("parametric", &NullClassProb::parametric)
      .def_static("plug_in_zero", &NullClassProb::plug_in_zero);

  py::enum_<Correction>(m, "Correction")
      .value("none", Correction::none)
      .value("plug_in_zero", Correction::plug_in_zero)
      .value("pa0_hat", Correction::pa0_hat);

  py::class_<SubclassFdrReport>(m, "SubclassFdrReport")
      .def_readonly("grid", &SubclassFdrReport::grid)
      .def_readonly("fdr_combined", &SubclassFdrReport::fdr_combined)
      .def_readonly("r_a", &SubclassFdrReport::r_a)
      .def_readonly("fdr_a", &SubclassFdrReport::fdr_a)
      .def_readonly("p_a0_hat", &SubclassFdrReport::p_a0_hat)
      .def_readonly("sd_log_fdr", &SubclassFdrReport::sd_log_fdr)
      .def_readonly("sd_log_r_a", &SubclassFdrReport::sd_log_r_a)
      .def_readonly("sd_log_fdr_a", &SubclassFdrReport::sd_log_fdr_a)
      .def_readonly("pi_floor_hit", &SubclassFdrReport::pi_floor_hit);

  m.def(
      "subclass_fdr_curve",
      [](const FdrCurve& fdr, const ClassProbCurve& pa, const NullClassProb& pa0,
         Correction corr, const std::vector<double>& class_a_z) {
        return subclass_fdr_curve(fdr, pa, pa0, corr, class_a_z);
      },
      py::arg("fdr"), py::arg("pa"), py::arg("pa0"), py::arg("correction") = Correction::none,
      py::arg("class_a_z") = std::vector<double>{});

  py::class_<TailFdrReport>(m, "TailFdrReport")
      .def_readonly("grid", &TailFdrReport::grid)
      .def_readonly("fdr_tail", &TailFdrReport::fdr_tail)
      .def_readonly("r_a_tail", &TailFdrReport::r_a_tail)
      .def_readonly("fdr_a_tail", &TailFdrReport::fdr_a_tail);

  m.def(
      "subclass_tail_fdr",
      [](const FdrCurve& fdr, const ClassProbCurve& pa, const NullClassProb& pa0,
         const std::string& dir) { return subclass_tail_fdr(fdr, pa, pa0, parse_dir(dir)); },
      py::arg("fdr"), py::arg("pa"), py::arg("pa0"), py::arg("direction") = "left");

  py::class_<RelevanceFunction>(m, "RelevanceFunction")
      .def_static("indicator", &RelevanceFunction::indicator)
      .def_static("kernel", &RelevanceFunction::kernel, py::arg("covariate"),
                  py::arg("scale") = 10.0);

  py::class_<RelevanceFdrValue>(m, "RelevanceFdrValue")
      .def_readonly("fdr_bar", &RelevanceFdrValue::fdr_bar)
      .def_readonly("r_bar", &RelevanceFdrValue::r_bar)
      .def_readonly("fdr_bar_i", &RelevanceFdrValue::fdr_bar_i)
      .def_readonly("n_tail", &RelevanceFdrValue::n_tail);

  m.def(
      "relevance_weighted_fdr",
      [](const Dataset& ds, std::size_t focal, const RelevanceFunction& rho,
         const NullEstimate& ne, double z, const std::string& dir) {
        return relevance_weighted_fdr(ds, focal, rho, ne, z, parse_dir(dir));
      },
      py::arg("dataset"), py::arg("focal_index"), py::arg("rho"), py::arg("null"),
      py::arg("z"), py::arg("direction") = "left");

  py::class_<FlatnessReport>(m, "FlatnessReport")
      .def_readonly("max_abs_logit_slope", &FlatnessReport::max_abs_logit_slope)
      .def_readonly("mean_slope", &FlatnessReport::mean_slope)
      .def_readonly("mean_slope_se", &FlatnessReport::mean_slope_se)
      .def_readonly("flat", &FlatnessReport::flat);
  m.def("null_flatness_diagnostic", &null_flatness_diagnostic, py::arg("pa"),
        py::arg("window_lo") = -1.0, py::arg("window_hi") = 1.0);

  py::class_<EnrichmentResult>(m, "EnrichmentResult")
      .def_readonly("set_label", &EnrichmentResult::set_label)
      .def_readonly("n_a", &EnrichmentResult::n_a)
      .def_readonly("s", &EnrichmentResult::s)
      .def_readonly("p_two_sided", &EnrichmentResult::p_two_sided)
      .def_readonly("s_pos", &EnrichmentResult::s_pos)
      .def_readonly("s_neg", &EnrichmentResult::s_neg)
      .def_readonly("per_case_fdr_a", &EnrichmentResult::per_case_fdr_a)
      .def_readonly("n_below_threshold", &EnrichmentResult::n_below_threshold);

  m.def("enrichment_slope_test", &enrichment_slope_test, py::arg("dataset"),
        py::arg("set_label"), py::arg("side_split") = false);
  m.def(
      "enrichment_fdr_report",
      [](const Dataset& ds, const std::string& label, const FdrCurve& fdr) {
        return enrichment_fdr_report(ds, label, fdr);
      },
      py::arg("dataset"), py::arg("set_label"), py::arg("fdr"));

  py::class_<NormalParams>(m, "NormalParams")
      .def(py::init([](double mean, double sd) { return NormalParams{mean, sd}; }),
           py::arg("mean") = 0.0, py::arg("sd") = 1.0)
      .def_readwrite("mean", &NormalParams::mean)
      .def_readwrite("sd", &NormalParams::sd);

  py::class_<TwoClassSimConfig>(m, "TwoClassSimConfig")
      .def(py::init<>())
      .def_readwrite("n", &TwoClassSimConfig::n)
      .def_readwrite("pi_a", &TwoClassSimConfig::pi_a)
      .def_readwrite("p_a0", &TwoClassSimConfig::p_a0)
      .def_readwrite("p_b0", &TwoClassSimConfig::p_b0)
      .def_readwrite("null_a", &TwoClassSimConfig::null_a)
      .def_readwrite("null_b", &TwoClassSimConfig::null_b)
      .def_readwrite("alt_a", &TwoClassSimConfig::alt_a)
      .def_readwrite("alt_b", &TwoClassSimConfig::alt_b)
      .def_readwrite("seed", &TwoClassSimConfig::seed);

  m.def("simulate_two_class", &simulate_two_class);

  py::class_<TwoClassOracle>(m, "TwoClassOracle")
      .def(py::init<const TwoClassSimConfig&>())
      .def("fdr", &TwoClassOracle::fdr)
      .def("fdr_a", &TwoClassOracle::fdr_a)
      .def("fdr_b", &TwoClassOracle::fdr_b)
      .def("pi_a_given_z", &TwoClassOracle::pi_a_given_z)
      .def("pi_a0_given_z", &TwoClassOracle::pi_a0_given_z)
      .def("fdr_a_uncorrected", &TwoClassOracle::fdr_a_uncorrected)
      .def("f", &TwoClassOracle::f)
      .def("f0", &TwoClassOracle::f0);

  py::class_<SubclassStudyResult>(m, "SubclassStudyResult")
      .def_readonly("grid", &SubclassStudyResult::grid)
      .def_readonly("sd_log_fdr", &SubclassStudyResult::sd_log_fdr)
      .def_readonly("sd_log_r_a", &SubclassStudyResult::sd_log_r_a)
      .def_readonly("sd_log_fdr_a", &SubclassStudyResult::sd_log_fdr_a)
      .def_readonly("mean_fdr_a", &SubclassStudyResult::mean_fdr_a)
      .def_readonly("true_fdr_a", &SubclassStudyResult::true_fdr_a)
      .def_readonly("pa0_hats", &SubclassStudyResult::pa0_hats)
      .def_readonly("pa0_mean", &SubclassStudyResult::pa0_mean)
      .def_readonly("pa0_sd", &SubclassStudyResult::pa0_sd)
      .def_readonly("n_reps", &SubclassStudyResult::n_reps)
      .def_readonly("n_failures", &SubclassStudyResult::n_failures);

  m.def(
      "replicate_subclass_study",
      [](const TwoClassSimConfig& cfg, std::size_t reps, const std::string& null_mode,
         double central_fraction) {
        SubclassStudyConfig study;
        study.reps = reps;
        study.null_mode = null_mode == "theoretical"
                              ? SubclassStudyConfig::NullMode::theoretical
                              : SubclassStudyConfig::NullMode::empirical;
        study.null_central_fraction = central_fraction;
        return replicate_subclass_study(cfg, study);
      },
      py::arg("config"), py::arg("reps") = 100, py::arg("null_mode") = "empirical",
      py::arg("central_fraction") = 0.70);

  py::class_<PoissonSimConfig>(m, "PoissonSimConfig")
      .def(py::init([](double mu, double e0, double e1, std::uint64_t seed) {
             return PoissonSimConfig{mu, e0, e1, seed};
           }),
           py::arg("mu") = 1000.0, py::arg("e0") = 10.0, py::arg("e1") = 90.0,
           py::arg("seed") = 1)
      .def_readwrite("e0", &PoissonSimConfig::e0)
      .def_readwrite("e1", &PoissonSimConfig::e1)
      .def_readwrite("seed", &PoissonSimConfig::seed);

  py::class_<PoissonCheckReport>(m, "PoissonCheckReport")
      .def_readonly("fdr", &PoissonCheckReport::fdr)
      .def_readonly("predicted_fdrbar", &PoissonCheckReport::predicted_fdrbar)
      .def_readonly("mean_fdrbar", &PoissonCheckReport::mean_fdrbar)
      .def_readonly("se_fdrbar", &PoissonCheckReport::se_fdrbar)
      .def_readonly("mean_fdp", &PoissonCheckReport::mean_fdp)
      .def_readonly("se_fdp", &PoissonCheckReport::se_fdp);

  m.def("poisson_model_checks", &poisson_model_checks, py::arg("config"),
        py::arg("reps") = 10000);

  py::class_<ControlCheckReport>(m, "ControlCheckReport")
      .def_readonly("q", &ControlCheckReport::q)
      .def_readonly("mean_fdp_comb", &ControlCheckReport::mean_fdp_comb)
      .def_readonly("mc_se", &ControlCheckReport::mc_se)
      .def_readonly("mean_rejections", &ControlCheckReport::mean_rejections);

  m.def(
      "combined_control_check",
      [](const TwoClassSimConfig& cfg, double q, std::size_t reps) {
        return combined_control_check(cfg, q, reps);
      },
      py::arg("config"), py::arg("q") = 0.1, py::arg("reps") = 500);

  py::class_<JensenReport>(m, "JensenReport")
      .def_readonly("holds", &JensenReport::holds)
      .def_readonly("min_margin", &JensenReport::min_margin);

  m.def(
      "jensen_information_check",
      [](const TwoClassOracle& oracle, const std::string& loss,
         const std::vector<double>& grid) {
        return jensen_information_check(
            oracle, loss == "entropy" ? QLoss::entropy : QLoss::variance, grid);
      },
      py::arg("oracle"), py::arg("loss") = "variance", py::arg("grid"));

  // io surface
  m.def(
      "load_table",
      [](const std::string& path, const std::string& z_column,
         const std::optional<std::string>& class_column) {
        AnalysisConfig cfg;
        cfg.z_column = z_column;
        cfg.class_column = class_column;
        return load_table(path, cfg);
      },
      py::arg("path"), py::arg("z_column") = "z", py::arg("class_column") = std::nullopt);
  m.def("load_gene_sets", &load_gene_sets);
  m.def("apply_set_labels", &apply_set_labels);
  m.def("adjust_z_local", &adjust_z_local, py::arg("dataset"), py::arg("covariate"),
        py::arg("window") = 200);

  m.attr("__version__") = library_version();
}
