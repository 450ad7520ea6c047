#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace covfdr {

// Bad input: malformed files, invariant violations, unusable arguments.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical fitting failure: non-convergence, degenerate designs.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Case {
  std::string id;
  double z = 0.0;
  std::map<std::string, double> covariates;
  std::optional<std::string> class_label;
  std::optional<bool> is_null_truth;  // simulation bookkeeping only
};

// Immutable after validation; share freely across threads.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Case> cases) : cases_(std::move(cases)) {}

  const std::vector<Case>& cases() const { return cases_; }
  const Case& at(std::size_t i) const { return cases_.at(i); }
  std::size_t size() const { return cases_.size(); }

  std::vector<double> z_values() const;
  // Sorted distinct class labels present in the data.
  std::vector<std::string> label_set() const;
  double covariate(std::size_t i, const std::string& name) const;

 private:
  std::vector<Case> cases_;
};

// Checks finite z's, unique ids, non-emptiness; returns the dataset unchanged.
Dataset validate_dataset(Dataset ds);

struct ClassPartition {
  std::string label_a;
  std::vector<std::size_t> indices_a;
  std::vector<std::size_t> indices_b;
  double pi_a = 0.0;
  double pi_b = 0.0;
};

ClassPartition partition_by_class(const Dataset& ds, const std::string& label);

// Relevance of case j to a focal case i: indicator of shared class, or the
// kernel 1/(1 + |x_j - x_i|/scale) on a named covariate.
class RelevanceFunction {
 public:
  enum class Kind { indicator, kernel };

  static RelevanceFunction indicator(std::string class_label);
  static RelevanceFunction kernel(std::string covariate, double scale = 10.0);

  double operator()(const Case& focal, const Case& other) const;
  Kind kind() const { return kind_; }

 private:
  RelevanceFunction(Kind k, std::string name, double scale)
      : kind_(k), name_(std::move(name)), scale_(scale) {}

  Kind kind_;
  std::string name_;  // class label or covariate name
  double scale_;
};

}  // namespace covfdr
