#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace covfdr {

// Standard normal density and distribution function.
double norm_pdf(double z);
double norm_cdf(double z);

// Inverse standard normal c.d.f. (Wichura's AS 241, double precision).
double norm_quantile(double p);

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

// Type-7 (linear interpolation) sample quantile; copies and sorts.
double quantile(std::vector<double> v, double p);
double median(std::vector<double> v);

std::uint64_t splitmix64(std::uint64_t x);

// Stable per-stream seed so replication r sees the same draws regardless of
// scheduling or worker count.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform on [0, 1)
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double normal(double mu = 0.0, double sd = 1.0);

  // uniform integer on [0, n)
  std::uint64_t integer(std::uint64_t n);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace covfdr
