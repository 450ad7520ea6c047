#include "covfdr/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace covfdr {

std::vector<double> Dataset::z_values() const {
  std::vector<double> z;
  z.reserve(cases_.size());
  for (const auto& c : cases_) z.push_back(c.z);
  return z;
}

std::vector<std::string> Dataset::label_set() const {
  std::set<std::string> labels;
  for (const auto& c : cases_)
    if (c.class_label) labels.insert(*c.class_label);
  return {labels.begin(), labels.end()};
}

double Dataset::covariate(std::size_t i, const std::string& name) const {
  const auto& cov = cases_.at(i).covariates;
  auto it = cov.find(name);
  if (it == cov.end())
    throw DataError("case '" + cases_[i].id + "' has no covariate '" + name + "'");
  return it->second;
}

Dataset validate_dataset(Dataset ds) {
  if (ds.size() == 0) throw DataError("empty dataset");
  std::unordered_set<std::string> seen;
  seen.reserve(ds.size());
  for (const auto& c : ds.cases()) {
    if (!std::isfinite(c.z)) throw DataError("non-finite z for case '" + c.id + "'");
    if (!seen.insert(c.id).second) throw DataError("duplicate id '" + c.id + "'");
  }
  return ds;
}

ClassPartition partition_by_class(const Dataset& ds, const std::string& label) {
  ClassPartition part;
  part.label_a = label;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& c = ds.at(i);
    if (c.class_label && *c.class_label == label)
      part.indices_a.push_back(i);
    else
      part.indices_b.push_back(i);
  }
  if (part.indices_a.empty()) throw DataError("unknown or empty class '" + label + "'");
  if (part.indices_b.empty()) throw DataError("empty class B: every case is labeled '" + label + "'");
  part.pi_a = static_cast<double>(part.indices_a.size()) / static_cast<double>(ds.size());
  part.pi_b = 1.0 - part.pi_a;
  return part;
}

RelevanceFunction RelevanceFunction::indicator(std::string class_label) {
  return RelevanceFunction(Kind::indicator, std::move(class_label), 0.0);
}

RelevanceFunction RelevanceFunction::kernel(std::string covariate, double scale) {
  if (!(scale > 0.0)) throw DataError("relevance kernel scale must be > 0");
  return RelevanceFunction(Kind::kernel, std::move(covariate), scale);
}

double RelevanceFunction::operator()(const Case& focal, const Case& other) const {
  if (kind_ == Kind::indicator)
    return other.class_label && *other.class_label == name_ ? 1.0 : 0.0;
  auto fi = focal.covariates.find(name_);
  auto oi = other.covariates.find(name_);
  if (fi == focal.covariates.end() || oi == other.covariates.end())
    throw DataError("missing covariate '" + name_ + "' for relevance kernel");
  return 1.0 / (1.0 + std::fabs(oi->second - fi->second) / scale_);
}

}  // namespace covfdr
