#include "coupledpf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coupledpf/stats.hpp"

namespace coupledpf {

FdResult fd_score(const Model& model, const Parameter& theta, std::size_t index, double h,
                  const Observations& y, std::size_t particles, const Scheme& scheme,
                  const SeedKey& key) {
  detail::require(h > 0.0 && std::isfinite(h), "fd_score: perturbation h must be positive");
  detail::require(index < theta.size(), "fd_score: parameter index out of range");
  FdResult out;
  out.h = h;
  if (scheme.kind == SchemeKind::independent) {
    out.loglik_minus = bootstrap_pf(model, theta.shifted(index, -h), y, particles, key.with_sweep(0)).loglik;
    out.loglik_plus = bootstrap_pf(model, theta.shifted(index, h), y, particles, key.with_sweep(1)).loglik;
  } else {
    const auto run = coupled_bpf(model, theta.shifted(index, -h), theta.shifted(index, h), y,
                                 particles, scheme, key);
    out.loglik_minus = run.trace.loglik;
    out.loglik_plus = run.trace_tilde.loglik;
  }
  out.estimate = (out.loglik_plus - out.loglik_minus) / (2.0 * h);
  return out;
}

CorrelationGain correlation_gain(ConstSpan first, ConstSpan second) {
  detail::require_dims(first.size() == second.size(), "correlation_gain: columns differ in length");
  detail::require(first.size() >= 3, "correlation_gain: need at least three pairs");
  CorrelationGain out;
  out.rho = stats::correlation(first, second);
  out.gain = out.rho < 1.0 ? 1.0 / (1.0 - out.rho) : std::numeric_limits<double>::infinity();
  return out;
}

double McmcChain::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  return static_cast<double>(std::count(accepted.begin(), accepted.end(), true)) /
         static_cast<double>(accepted.size());
}

double log_acceptance_ratio(double loglik, double log_prior, double loglik_tilde,
                            double log_prior_tilde) {
  return (loglik_tilde + log_prior_tilde) - (loglik + log_prior);
}

McmcChain correlated_pmmh(const Model& model, const LogDensity& log_prior, const Observations& y,
                          const Parameter& theta0, const PmmhOptions& options, const SeedKey& key) {
  const std::size_t dim = theta0.size();
  detail::require(dim >= 1, "pmmh: model has no parameters to sample");
  detail::require_dims(options.proposal_sd.size() == dim, "pmmh: proposal_sd length must match theta");
  detail::require(options.rho >= 0.0 && options.rho <= 1.0, "pmmh: rho must lie in [0, 1]");
  detail::require(options.particles >= 1, "pmmh: need at least one particle");
  const auto kind = options.scheme.kind;
  if (kind == SchemeKind::transport) {
    throw InvalidArgument("pmmh: raw transport breaks detailed balance; use transport-symmetrized");
  }
  if (kind == SchemeKind::naive_systematic) {
    throw InvalidArgument("pmmh: the naive systematic scheme is a smoothing baseline only");
  }
  model.check_parameter(theta0);
  double lp = log_prior(theta0);
  detail::require(std::isfinite(lp), "pmmh: prior density at the initial point must be positive");

  const auto resampler = kind == SchemeKind::sorted ? MarginalResampler::sorted_systematic
                                                    : MarginalResampler::multinomial;
  Parameter theta = theta0;
  const SeedKey start = key.with_sweep(0);
  FilterTrace current = bootstrap_pf(
      model, theta, y, ProcessNoise::draw(model, options.particles, y.horizon(), start), start,
      resampler);
  detail::require(!current.degenerate, "pmmh: the filter at the initial point degenerated");

  McmcChain chain;
  chain.theta.resize(static_cast<Eigen::Index>(options.iterations), static_cast<Eigen::Index>(dim));
  chain.loglik.resize(options.iterations);
  chain.accepted.resize(options.iterations);

  for (std::size_t i = 0; i < options.iterations; ++i) {
    const SeedKey ki = key.with_sweep(i + 1);
    Stream prop(ki.with_role(Role::mcmc).with_particle(0xFFFFFFFEU));
    std::vector<double> v = theta.values();
    for (std::size_t j = 0; j < dim; ++j) v[j] += options.proposal_sd[j] * prop.normal();
    const double log_u = std::log(1.0 - prop.uniform());

    bool accept = false;
    bool valid = true;
    for (double x : v) valid = valid && std::isfinite(x);
    if (valid) {
      const Parameter proposal(v);
      double lp_new = -std::numeric_limits<double>::infinity();
      try {
        model.check_parameter(proposal);
        lp_new = log_prior(proposal);
      } catch (const InvalidArgument&) {
        lp_new = -std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(lp_new)) {
        auto noise = current.noise.shifted(options.rho, ki);
        FilterTrace candidate;
        try {
          candidate = conditional_rerun(current, model, proposal, y, std::move(noise), options.scheme, ki);
        } catch (const ModelError&) {
          candidate.degenerate = true;
        }
        if (!candidate.degenerate &&
            log_u < log_acceptance_ratio(current.loglik, lp, candidate.loglik, lp_new)) {
          accept = true;
          theta = proposal;
          lp = lp_new;
          current = std::move(candidate);
        }
      }
    }
    for (std::size_t j = 0; j < dim; ++j) {
      chain.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = theta[j];
    }
    chain.loglik[i] = current.loglik;
    chain.accepted[i] = accept;
  }
  return chain;
}

EssResult ess(ConstSpan values) {
  const std::size_t m = values.size();
  detail::require(m >= 100, "ess: need at least 100 draws");
  EssResult out;
  const double mu = stats::mean(values);
  double c0 = 0.0;
  for (double x : values) c0 += (x - mu) * (x - mu);
  c0 /= static_cast<double>(m);
  if (!(c0 > 0.0)) {
    out.ess = static_cast<double>(m);
    out.constant = true;
    return out;
  }
  auto autocorr = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < m; ++i) acc += (values[i] - mu) * (values[i + lag] - mu);
    return acc / (static_cast<double>(m) * c0);
  };
  // Geyer: sum consecutive pairs while their sum stays positive.
  double sum_pairs = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < m; ++k) {
    const double gamma = (k == 0 ? 1.0 : autocorr(2 * k)) + autocorr(2 * k + 1);
    if (gamma <= 0.0) break;
    sum_pairs += gamma;
  }
  const double floor_iact = 1.0 / std::log10(static_cast<double>(m));
  out.iact = std::max(-1.0 + 2.0 * sum_pairs, floor_iact);
  out.ess = static_cast<double>(m) / out.iact;
  return out;
}

ChainSummary summarize_chain(ConstSpan values) {
  ChainSummary s;
  s.mean = stats::mean(values);
  s.sd = stats::sd(values);
  s.ess = ess(values).ess;
  s.mcse_mean = s.sd / std::sqrt(s.ess);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (values[i] - s.mean) * (values[i] - s.mean);
  const double ess_sq = ess(sq).ess;
  s.mcse_sd = s.sd > 0.0 ? stats::sd(sq) / (2.0 * s.sd * std::sqrt(ess_sq)) : 0.0;
  return s;
}

}  // namespace coupledpf
