#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "coupledpf/filters.hpp"

namespace coupledpf::harness {

/// Settings shared by every experiment. Field names double as config keys and
/// CLI flags (T, N, R are spelled horizon, particles, replicates in config files
/// and --T, --N, --R on the command line).
struct ExperimentConfig {
  std::string model = "hidden-ar";
  std::size_t dim = 1;
  std::vector<double> theta;       ///< empty: model default
  std::vector<double> theta_grid;  ///< profile-likelihood grid
  std::size_t horizon = 100;
  std::size_t particles = 128;
  std::size_t replicates = 100;
  std::string scheme = "index-coupled";
  std::vector<std::string> schemes;  ///< fd-score study; empty means {scheme}
  double epsilon_frac = 0.05;
  double alpha_target = 0.95;
  double rho = 0.99;
  std::vector<double> h{0.001};
  std::size_t m = 0;
  double p = 0.0;
  std::size_t iterations = 1000;
  std::size_t max_iterations = 10000;
  std::vector<double> proposal_sd;  ///< empty: 0.1 per component
  std::vector<double> prior_lower;  ///< empty: unbounded (hidden-ar: -1)
  std::vector<double> prior_upper;  ///< empty: unbounded (hidden-ar: 1)
  std::string test_function = "mean-per-time";
  bool rao_blackwell = false;
  bool ancestor_sampling = false;
  std::string data;  ///< observation CSV; empty: simulate at theta
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out;
  bool allow_incomplete = false;

  /// Every field that affects results, one `key=value` per line.
  [[nodiscard]] std::string canonical() const;
  [[nodiscard]] std::uint64_t hash() const;
  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// Sets one field from text; unknown keys and bad values throw InvalidArgument.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
/// Reads `key = value` settings on top of the defaults.
ExperimentConfig load_config(std::istream& in);

ModelPtr build_model(const ExperimentConfig& config);
Parameter build_theta(const ExperimentConfig& config, const Model& model);
Scheme build_scheme(const ExperimentConfig& config, std::string_view name);
/// Data from `config.data`, or simulated at theta under a key reserved for data.
Observations load_or_simulate(const ExperimentConfig& config, const Model& model,
                              const Parameter& theta);

/// Runs fn(r) for r in [0, count) on `workers` threads; results kept in replicate order.
template <class Result>
std::vector<Result> run_replicates(std::size_t count, std::size_t workers,
                                   const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> results(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t r = next++; r < count && !failed; r = next++) {
      try {
        results[r] = fn(r);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

struct RunOutput {
  std::string csv;            ///< main table, provenance line first
  std::string aggregate_csv;  ///< rg-smooth only
  std::string summary_json;
  int exit_code = 0;
};

RunOutput run_simulate(const ExperimentConfig& config);
RunOutput run_profile(const ExperimentConfig& config);
RunOutput run_fd_study(const ExperimentConfig& config);
RunOutput run_pmmh(const ExperimentConfig& config);
RunOutput run_rg(const ExperimentConfig& config);
/// Oracle self-checks; one PASS/FAIL line each in `csv`.
RunOutput run_validate(const ExperimentConfig& config);

}  // namespace coupledpf::harness
