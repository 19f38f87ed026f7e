#pragma once

#include <vector>

#include "coupledpf/models.hpp"
#include "coupledpf/scheme.hpp"

namespace coupledpf {

/// Process-generating variables of one filter run: the init and propagation
/// noise of every particle plus one normal per resampling step (turned into a
/// uniform by schemes that resample from their own variables).
struct ProcessNoise {
  std::vector<Matrix> blocks;            ///< T+1 blocks, N rows each
  std::vector<double> resample_normals;  ///< T entries, step t = 0..T-1

  /// Roles init (t = 0) and propagate (t >= 1), one stream per (t, particle).
  static ProcessNoise draw(const Model& model, std::size_t particles, std::size_t horizon,
                           const SeedKey& key);
  /// rho * this + sqrt(1 - rho^2) * xi with xi drawn from `key` (every stream under its mcmc role).
  [[nodiscard]] ProcessNoise shifted(double rho, const SeedKey& key) const;

  [[nodiscard]] std::size_t particles() const {
    return blocks.empty() ? 0 : static_cast<std::size_t>(blocks.front().rows());
  }
  [[nodiscard]] std::size_t horizon() const { return blocks.empty() ? 0 : blocks.size() - 1; }
};

/// Everything generated by a filter run.
struct FilterTrace {
  std::vector<Matrix> states;                    ///< x_0 .. x_T
  std::vector<std::vector<double>> log_weights;  ///< normalized, t = 0 .. T (uniform at 0)
  std::vector<Ancestors> ancestors;              ///< a_0 .. a_{T-1}
  std::vector<double> loglik_increments;         ///< one per observation
  double loglik = 0.0;
  bool degenerate = false;  ///< every weight vanished at some step; loglik = -inf
  ProcessNoise noise;

  [[nodiscard]] std::size_t particles() const {
    return states.empty() ? 0 : static_cast<std::size_t>(states.front().rows());
  }
  [[nodiscard]] std::size_t horizon() const { return states.empty() ? 0 : states.size() - 1; }
  [[nodiscard]] std::vector<double> weights(std::size_t t) const;
  /// Path x_{0:T} ending at final particle k.
  [[nodiscard]] Trajectory trajectory(std::size_t k) const;
};

enum class MarginalResampler {
  multinomial,
  /// Systematic in Hilbert order of the cloud, uniform = Phi(resample normal).
  sorted_systematic,
};

/// Bootstrap particle filter with multinomial (or sorted) resampling at every step.
FilterTrace bootstrap_pf(const Model& model, const Parameter& theta, const Observations& y,
                         std::size_t particles, const SeedKey& key,
                         MarginalResampler resampler = MarginalResampler::multinomial);

/// Same with the process noise supplied; `key` feeds multinomial resampling only.
FilterTrace bootstrap_pf(const Model& model, const Parameter& theta, const Observations& y,
                         ProcessNoise noise, const SeedKey& key, MarginalResampler resampler);

struct CoupledTraces {
  FilterTrace trace;
  FilterTrace trace_tilde;
};

/// Two bootstrap filters at theta and theta_tilde sharing their process noise,
/// with ancestors drawn jointly by `scheme` at each step.
CoupledTraces coupled_bpf(const Model& model, const Parameter& theta,
                          const Parameter& theta_tilde, const Observations& y,
                          std::size_t particles, const Scheme& scheme, const SeedKey& key);

/// Second filter at theta_tilde with noise `noise_tilde`, resampled conditionally
/// on the ancestors stored in `trace`. Sorted and naive schemes resample from
/// the new system's own variables.
FilterTrace conditional_rerun(const FilterTrace& trace, const Model& model,
                              const Parameter& theta_tilde, const Observations& y,
                              ProcessNoise noise_tilde, const Scheme& scheme, const SeedKey& key);

struct CpfResult {
  Trajectory path;
  FilterTrace trace;  ///< the reference occupies the last slot
};

/// Conditional particle filter: the reference sits in the last slot; with
/// ancestor sampling its ancestor is redrawn from w_t^k f(ref_{t+1} | x_t^k).
CpfResult cpf(const Model& model, const Parameter& theta, const Observations& y,
              std::size_t particles, const Trajectory& ref, bool ancestor_sampling,
              const SeedKey& key);

struct CoupledCpfResult {
  CpfResult first;
  CpfResult second;
};

/// Two conditional filters sharing noise, free ancestors coupled by `scheme`,
/// final indices drawn from the same scheme.
CoupledCpfResult coupled_cpf(const Model& model, const Parameter& theta, const Observations& y,
                             std::size_t particles, const Trajectory& ref,
                             const Trajectory& ref_tilde, const Scheme& scheme,
                             bool ancestor_sampling, const SeedKey& key);

/// A path drawn from the final weights of a trace.
Trajectory sample_trajectory(const FilterTrace& trace, const SeedKey& key);

}  // namespace coupledpf
