#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coupledpf/filters.hpp"

namespace coupledpf {

/// Test functions on a path, evaluated per time and state component
/// (output index t * d_x + j).
enum class TestFunction {
  mean_per_time,           ///< x_t
  second_moment_per_time,  ///< x_t^2
};

/// "mean-per-time" or "second-moment-per-time".
TestFunction parse_test_function(std::string_view id);
std::string test_function_name(TestFunction h);

std::vector<double> evaluate(TestFunction h, const Trajectory& path);

/// sum_k w_T^k h(path of final particle k), accumulated backwards through the ancestry.
std::vector<double> rao_blackwell_average(TestFunction h, const FilterTrace& trace);

struct TruncationPolicy {
  enum class Kind { none, fixed_m, geometric };
  Kind kind = Kind::none;
  std::size_t m = 0;  ///< fixed_m: index of the first retained iterate
  double p = 0.0;     ///< geometric: success probability, G has P(G >= n) = (1 - p)^n

  static TruncationPolicy none() { return {}; }
  static TruncationPolicy fixed(std::size_t m) { return {Kind::fixed_m, m, 0.0}; }
  static TruncationPolicy geometric(double p) { return {Kind::geometric, 0, p}; }
};

/// Weight applied to the n-th difference: (1 - p)^-n under geometric truncation, else 1.
double truncated_weight(const TruncationPolicy& policy, std::size_t n);

struct RgOptions {
  std::size_t particles = 64;
  TestFunction h = TestFunction::mean_per_time;
  TruncationPolicy policy;
  bool rao_blackwell = false;
  bool ancestor_sampling = false;
  std::size_t max_iterations = 10000;
  Scheme scheme;  ///< index-coupled unless overridden; transport schemes are rejected
};

struct RgEstimate {
  std::vector<double> h;
  std::optional<std::size_t> tau;  ///< meeting iteration, unset when not observed
  std::size_t iterations_run = 0;  ///< conditional-filter sweeps
  std::uint64_t cost_units = 0;    ///< iterations_run * N * T
  std::optional<std::size_t> truncation;  ///< sampled G under geometric truncation
  bool complete = false;           ///< false when the cap was hit before the estimator closed
};

/// One unbiased estimate of the smoothing expectation of `options.h`.
RgEstimate rg_estimate(const Model& model, const Parameter& theta, const Observations& y,
                       const RgOptions& options, const SeedKey& key);

/// The estimator started at iterate m: h(X_m) plus the differences after m.
RgEstimate m_truncated_estimate(const Model& model, const Parameter& theta, const Observations& y,
                                RgOptions options, std::size_t m, const SeedKey& key);

struct RgSummary {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> se;
  std::vector<double> ci_low;   ///< mean - 2 se
  std::vector<double> ci_high;  ///< mean + 2 se
  std::size_t complete = 0;
  std::size_t incomplete = 0;
  double tau_mean = 0.0;
  double tau_sd = 0.0;
  std::size_t tau_max = 0;
};

/// Component-wise summary of the complete estimates; needs at least two.
RgSummary aggregate(const std::vector<RgEstimate>& estimates);

}  // namespace coupledpf
