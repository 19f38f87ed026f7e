#pragma once

#include <functional>
#include <vector>

#include "coupledpf/filters.hpp"

namespace coupledpf {

struct FdResult {
  double estimate = 0.0;  ///< (loglik_plus - loglik_minus) / (2 h)
  double loglik_plus = 0.0;
  double loglik_minus = 0.0;
  double h = 0.0;
};

/// Centered finite difference of the log-likelihood in component `index`,
/// from one coupled filter run at theta - h and theta + h. The independent
/// scheme runs two unrelated filters instead, the baseline the gain is measured against.
FdResult fd_score(const Model& model, const Parameter& theta, std::size_t index, double h,
                  const Observations& y, std::size_t particles, const Scheme& scheme,
                  const SeedKey& key);

struct CorrelationGain {
  double rho = 0.0;
  double gain = 1.0;  ///< 1 / (1 - rho)
};

/// Sample correlation of paired log-likelihoods and the implied variance reduction.
CorrelationGain correlation_gain(ConstSpan first, ConstSpan second);

using LogDensity = std::function<double(const Parameter&)>;

struct PmmhOptions {
  std::vector<double> proposal_sd;  ///< random-walk scale per component
  double rho = 0.99;                ///< noise refresh correlation
  std::size_t particles = 32;
  std::size_t iterations = 1000;
  Scheme scheme;
};

struct McmcChain {
  Matrix theta;                  ///< iterations x d_theta
  std::vector<double> loglik;
  std::vector<bool> accepted;

  [[nodiscard]] double acceptance_rate() const;
};

/// Log acceptance ratio for a symmetric proposal.
double log_acceptance_ratio(double loglik, double log_prior, double loglik_tilde,
                            double log_prior_tilde);

/// Particle marginal Metropolis-Hastings where the proposed filter reuses the
/// current noise shifted by rho and is resampled conditionally on the current
/// ancestors. Raw transport is rejected; use transport-symmetrized.
McmcChain correlated_pmmh(const Model& model, const LogDensity& log_prior,
                          const Observations& y, const Parameter& theta0,
                          const PmmhOptions& options, const SeedKey& key);

struct EssResult {
  double ess = 0.0;
  double iact = 1.0;
  bool constant = false;  ///< zero variance; ess reported as the length
};

/// Effective sample size with the autocorrelation sum truncated by Geyer's
/// initial positive sequence; capped at M log10(M).
EssResult ess(ConstSpan values);

/// Monte Carlo standard errors of the chain mean and standard deviation.
struct ChainSummary {
  double mean = 0.0;
  double sd = 0.0;
  double mcse_mean = 0.0;
  double mcse_sd = 0.0;
  double ess = 0.0;
};

ChainSummary summarize_chain(ConstSpan values);

}  // namespace coupledpf
