#include "coupledpf/filters.hpp"

#include <cmath>
#include <limits>

#include "coupledpf/stats.hpp"

namespace coupledpf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint32_t kResampleNormalSlot = 0xFFFFFFFFU;
constexpr std::uint32_t kAncestorSlot = 1;

SeedKey resample_key(const SeedKey& key, std::size_t t) {
  return key.with_role(Role::resample).with_time(static_cast<std::uint32_t>(t));
}

std::size_t noise_dim(const Model& model, std::size_t t) {
  return t == 0 ? model.spec().init_noise_dim : model.spec().step_noise_dim;
}

ProcessNoise draw_noise(const Model& model, std::size_t n, std::size_t horizon, const SeedKey& key,
                        bool fixed_role, Role role) {
  ProcessNoise noise;
  noise.blocks.resize(horizon + 1);
  for (std::size_t t = 0; t <= horizon; ++t) {
    const std::size_t dim = noise_dim(model, t);
    const Role r = fixed_role ? role : (t == 0 ? Role::init : Role::propagate);
    const SeedKey base = key.with_role(r).with_time(static_cast<std::uint32_t>(t));
    Matrix block(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < n; ++k) {
      Stream s(base.with_particle(static_cast<std::uint32_t>(k)));
      for (std::size_t j = 0; j < dim; ++j) {
        block(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = s.normal();
      }
    }
    noise.blocks[t] = std::move(block);
  }
  noise.resample_normals.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Role r = fixed_role ? role : Role::propagate;
    Stream s(key.with_role(r).with_time(static_cast<std::uint32_t>(t)).with_particle(kResampleNormalSlot));
    noise.resample_normals[t] = s.normal();
  }
  return noise;
}

void check_noise(const Model& model, const ProcessNoise& noise, std::size_t horizon) {
  detail::require_dims(noise.horizon() == horizon && noise.resample_normals.size() == horizon,
                       "process noise does not match the observation horizon");
  detail::require(noise.particles() >= 1, "process noise: need at least one particle");
  for (std::size_t t = 0; t <= horizon; ++t) {
    detail::require_dims(static_cast<std::size_t>(noise.blocks[t].cols()) == noise_dim(model, t) &&
                             noise.blocks[t].rows() == noise.blocks[0].rows(),
                         "process noise block has the wrong shape");
  }
}

Matrix init_cloud(const Model& model, const Parameter& theta, const Matrix& noise, std::size_t rows) {
  Matrix x(noise.rows(), static_cast<Eigen::Index>(model.spec().dim_state));
  for (std::size_t k = 0; k < rows; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    model.init_state(row_span(noise, r), theta, row_span(x, r));
  }
  return x;
}

Matrix propagate_cloud(const Model& model, const Parameter& theta, const Matrix& prev,
                       const Ancestors& a, const Matrix& noise, std::size_t t) {
  Matrix x(prev.rows(), prev.cols());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    model.propagate(row_span(prev, static_cast<Eigen::Index>(a[k])), row_span(noise, r), theta, t,
                    row_span(x, r));
  }
  return x;
}

/// Normalizes the log-weights of cloud x at time t; returns log(mean g).
double weigh(const Model& model, const Parameter& theta, const Observations& y, std::size_t t,
             const Matrix& x, std::vector<double>& lw) {
  const auto n = static_cast<std::size_t>(x.rows());
  lw.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    lw[k] = model.log_measurement(y.at(t), row_span(x, static_cast<Eigen::Index>(k)), theta, t);
  }
  const double total = stats::normalize_log_weights(lw);
  if (total == kNegInf) return kNegInf;
  return total - std::log(static_cast<double>(n));
}

std::vector<double> uniform_log_weights(std::size_t n) {
  return std::vector<double>(n, -std::log(static_cast<double>(n)));
}

Ancestors marginal_resample(MarginalResampler resampler, const FilterTrace& tr, std::size_t t,
                            std::size_t n, const SeedKey& key) {
  const auto w = tr.weights(t);
  if (resampler == MarginalResampler::multinomial) return multinomial(w, n, resample_key(key, t));
  const Matrix& x = tr.states[t];
  const unsigned order = default_hilbert_order(static_cast<std::size_t>(x.cols()));
  return sorted_resample(x, w, n, normal_cdf(tr.noise.resample_normals[t]), bounding_box(x), order);
}

void mark_degenerate(FilterTrace& tr) {
  tr.degenerate = true;
  tr.loglik = kNegInf;
}

}  // namespace

ProcessNoise ProcessNoise::draw(const Model& model, std::size_t particles, std::size_t horizon,
                                const SeedKey& key) {
  detail::require(particles >= 1, "process noise: need at least one particle");
  return draw_noise(model, particles, horizon, key, false, Role::init);
}

ProcessNoise ProcessNoise::shifted(double rho, const SeedKey& key) const {
  detail::require(rho >= 0.0 && rho <= 1.0, "crn shift: rho must lie in [0, 1]");
  ProcessNoise out = *this;
  const double c = std::sqrt(1.0 - rho * rho);
  if (rho == 1.0) return out;
  const std::size_t n = particles();
  const std::size_t horizon = this->horizon();
  for (std::size_t t = 0; t <= horizon; ++t) {
    const SeedKey base = key.with_role(Role::mcmc).with_time(static_cast<std::uint32_t>(t));
    Matrix& block = out.blocks[t];
    for (std::size_t k = 0; k < n; ++k) {
      Stream s(base.with_particle(static_cast<std::uint32_t>(k)));
      for (Eigen::Index j = 0; j < block.cols(); ++j) {
        const auto r = static_cast<Eigen::Index>(k);
        block(r, j) = rho * block(r, j) + c * s.normal();
      }
    }
  }
  for (std::size_t t = 0; t < horizon; ++t) {
    Stream s(key.with_role(Role::mcmc).with_time(static_cast<std::uint32_t>(t)).with_particle(kResampleNormalSlot));
    out.resample_normals[t] = rho * out.resample_normals[t] + c * s.normal();
  }
  return out;
}

std::vector<double> FilterTrace::weights(std::size_t t) const {
  return stats::to_weights(log_weights.at(t));
}

Trajectory FilterTrace::trajectory(std::size_t k) const {
  const std::size_t horizon = this->horizon();
  detail::require(ancestors.size() == horizon, "trajectory: trace is incomplete");
  detail::require(k < particles(), "trajectory: particle index out of range");
  Trajectory out;
  out.path.resize(static_cast<Eigen::Index>(horizon + 1), states.front().cols());
  std::size_t b = k;
  for (std::size_t t = horizon + 1; t-- > 0;) {
    out.path.row(static_cast<Eigen::Index>(t)) = states[t].row(static_cast<Eigen::Index>(b));
    if (t > 0) b = ancestors[t - 1][b];
  }
  return out;
}

Trajectory sample_trajectory(const FilterTrace& trace, const SeedKey& key) {
  const auto w = trace.weights(trace.horizon());
  const double u = Stream(resample_key(key, trace.horizon()).with_particle(kAncestorSlot + 1)).uniform();
  return trace.trajectory(inverse_cdf(w, u));
}

FilterTrace bootstrap_pf(const Model& model, const Parameter& theta, const Observations& y,
                         ProcessNoise noise, const SeedKey& key, MarginalResampler resampler) {
  model.check_parameter(theta);
  const std::size_t horizon = y.horizon();
  detail::require_dims(y.dim() == model.spec().dim_obs, "observations do not match the model");
  check_noise(model, noise, horizon);
  const std::size_t n = noise.particles();

  FilterTrace tr;
  tr.noise = std::move(noise);
  tr.states.push_back(init_cloud(model, theta, tr.noise.blocks[0], n));
  tr.log_weights.push_back(uniform_log_weights(n));
  for (std::size_t t = 0; t < horizon; ++t) {
    tr.ancestors.push_back(marginal_resample(resampler, tr, t, n, key));
    tr.states.push_back(propagate_cloud(model, theta, tr.states[t], tr.ancestors[t], tr.noise.blocks[t + 1], t + 1));
    std::vector<double> lw;
    const double inc = weigh(model, theta, y, t + 1, tr.states[t + 1], lw);
    tr.log_weights.push_back(std::move(lw));
    tr.loglik_increments.push_back(inc);
    if (inc == kNegInf) {
      mark_degenerate(tr);
      return tr;
    }
    tr.loglik += inc;
  }
  return tr;
}

FilterTrace bootstrap_pf(const Model& model, const Parameter& theta, const Observations& y,
                         std::size_t particles, const SeedKey& key, MarginalResampler resampler) {
  detail::require(particles >= 1, "bootstrap_pf: need at least one particle");
  return bootstrap_pf(model, theta, y, ProcessNoise::draw(model, particles, y.horizon(), key), key,
                      resampler);
}

CoupledTraces coupled_bpf(const Model& model, const Parameter& theta, const Parameter& theta_tilde,
                          const Observations& y, std::size_t particles, const Scheme& scheme,
                          const SeedKey& key) {
  detail::require(particles >= 1, "coupled_bpf: need at least one particle");
  model.check_parameter(theta);
  model.check_parameter(theta_tilde);
  detail::require_dims(y.dim() == model.spec().dim_obs, "observations do not match the model");
  const std::size_t horizon = y.horizon();
  const std::size_t n = particles;

  CoupledTraces out;
  FilterTrace& a = out.trace;
  FilterTrace& b = out.trace_tilde;
  a.noise = ProcessNoise::draw(model, n, horizon, key);
  b.noise = a.noise;
  a.states.push_back(init_cloud(model, theta, a.noise.blocks[0], n));
  b.states.push_back(init_cloud(model, theta_tilde, b.noise.blocks[0], n));
  a.log_weights.push_back(uniform_log_weights(n));
  b.log_weights.push_back(uniform_log_weights(n));

  for (std::size_t t = 0; t < horizon; ++t) {
    const bool alive_a = !a.degenerate;
    const bool alive_b = !b.degenerate;
    if (!alive_a && !alive_b) break;
    if (alive_a && alive_b) {
      auto pairs = coupled_resample(scheme, a.states[t], a.weights(t), b.states[t], b.weights(t), n,
                                    resample_key(key, t));
      a.ancestors.push_back(std::move(pairs.a));
      b.ancestors.push_back(std::move(pairs.a_tilde));
    } else if (alive_a) {
      a.ancestors.push_back(multinomial(a.weights(t), n, resample_key(key, t)));
    } else {
      b.ancestors.push_back(multinomial(b.weights(t), n, resample_key(key, t)));
    }
    for (auto* side : {&a, &b}) {
      if (side->degenerate) continue;
      const Parameter& th = side == &a ? theta : theta_tilde;
      side->states.push_back(propagate_cloud(model, th, side->states[t], side->ancestors[t],
                                             side->noise.blocks[t + 1], t + 1));
      std::vector<double> lw;
      const double inc = weigh(model, th, y, t + 1, side->states[t + 1], lw);
      side->log_weights.push_back(std::move(lw));
      side->loglik_increments.push_back(inc);
      if (inc == kNegInf) {
        mark_degenerate(*side);
      } else {
        side->loglik += inc;
      }
    }
  }
  return out;
}

FilterTrace conditional_rerun(const FilterTrace& trace, const Model& model,
                              const Parameter& theta_tilde, const Observations& y,
                              ProcessNoise noise_tilde, const Scheme& scheme, const SeedKey& key) {
  model.check_parameter(theta_tilde);
  const std::size_t horizon = y.horizon();
  detail::require(!trace.degenerate && trace.horizon() == horizon && trace.ancestors.size() == horizon,
                  "conditional_rerun: stored trace is incomplete");
  detail::require_dims(static_cast<std::size_t>(trace.states[0].cols()) == model.spec().dim_state,
                       "conditional_rerun: trace does not match the model");
  check_noise(model, noise_tilde, horizon);
  detail::require_dims(noise_tilde.particles() == trace.particles(),
                       "conditional_rerun: noise and trace differ in particle count");
  if (scheme.kind == SchemeKind::naive_systematic) {
    throw UnsupportedOperation("conditional_rerun: the naive systematic scheme is a smoothing baseline only");
  }
  const std::size_t n = trace.particles();

  FilterTrace tr;
  tr.noise = std::move(noise_tilde);
  tr.states.push_back(init_cloud(model, theta_tilde, tr.noise.blocks[0], n));
  tr.log_weights.push_back(uniform_log_weights(n));
  for (std::size_t t = 0; t < horizon; ++t) {
    if (scheme.kind == SchemeKind::sorted) {
      tr.ancestors.push_back(marginal_resample(MarginalResampler::sorted_systematic, tr, t, n, key));
    } else {
      tr.ancestors.push_back(conditional_resample(scheme, trace.states[t], trace.weights(t),
                                                  trace.ancestors[t], tr.states[t], tr.weights(t),
                                                  resample_key(key, t)));
    }
    tr.states.push_back(propagate_cloud(model, theta_tilde, tr.states[t], tr.ancestors[t],
                                        tr.noise.blocks[t + 1], t + 1));
    std::vector<double> lw;
    const double inc = weigh(model, theta_tilde, y, t + 1, tr.states[t + 1], lw);
    tr.log_weights.push_back(std::move(lw));
    tr.loglik_increments.push_back(inc);
    if (inc == kNegInf) {
      mark_degenerate(tr);
      return tr;
    }
    tr.loglik += inc;
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Conditional filters

namespace {

struct CpfSide {
  const Trajectory* ref = nullptr;
  FilterTrace tr;
};

void check_reference(const Model& model, const Observations& y, const Trajectory& ref) {
  detail::require_dims(ref.path.rows() == static_cast<Eigen::Index>(y.horizon() + 1) &&
                           static_cast<std::size_t>(ref.path.cols()) == model.spec().dim_state,
                       "reference trajectory does not match the horizon or state dimension");
}

void start_side(const Model& model, const Parameter& theta, CpfSide& side, std::size_t n) {
  side.tr.states.push_back(init_cloud(model, theta, side.tr.noise.blocks[0], n - 1));
  side.tr.states[0].row(static_cast<Eigen::Index>(n - 1)) = side.ref->path.row(0);
  side.tr.log_weights.push_back(uniform_log_weights(n));
}

/// Log of the ancestor-sampling weights w_t^k f(ref_{t+1} | x_t^k), normalized.
std::vector<double> ancestor_weights(const Model& model, const Parameter& theta,
                                     const FilterTrace& tr, const Trajectory& ref, std::size_t t) {
  const auto& x = tr.states[t];
  std::vector<double> lw = tr.log_weights[t];
  const auto next = row_span(ref.path, static_cast<Eigen::Index>(t + 1));
  for (std::size_t k = 0; k < lw.size(); ++k) {
    if (lw[k] == kNegInf) continue;
    lw[k] += model.log_transition(row_span(x, static_cast<Eigen::Index>(k)), next, theta, t + 1);
  }
  if (stats::normalize_log_weights(lw) == kNegInf) {
    lw.assign(lw.size(), kNegInf);
    lw.back() = 0.0;
  }
  return stats::to_weights(lw);
}

/// Propagates free rows, pins the reference row, weighs; false when degenerate.
bool advance_side(const Model& model, const Parameter& theta, const Observations& y, CpfSide& side,
                  std::size_t t) {
  auto& tr = side.tr;
  const std::size_t n = tr.particles();
  Ancestors free(tr.ancestors[t].begin(), tr.ancestors[t].end() - 1);
  Matrix x = propagate_cloud(model, theta, tr.states[t], free, tr.noise.blocks[t + 1], t + 1);
  x.row(static_cast<Eigen::Index>(n - 1)) = side.ref->path.row(static_cast<Eigen::Index>(t + 1));
  tr.states.push_back(std::move(x));
  std::vector<double> lw;
  const double inc = weigh(model, theta, y, t + 1, tr.states[t + 1], lw);
  tr.log_weights.push_back(std::move(lw));
  tr.loglik_increments.push_back(inc);
  if (inc == kNegInf) {
    mark_degenerate(tr);
    return false;
  }
  tr.loglik += inc;
  return true;
}

Ancestors single_side_ancestors(const Model& model, const Parameter& theta, const CpfSide& side,
                                std::size_t t, bool ancestor_sampling, const SeedKey& key) {
  const std::size_t n = side.tr.particles();
  Ancestors a = multinomial(side.tr.weights(t), n - 1, resample_key(key, t));
  std::size_t ref_anc = n - 1;
  if (ancestor_sampling) {
    const auto nu = ancestor_weights(model, theta, side.tr, *side.ref, t);
    ref_anc = inverse_cdf(nu, Stream(resample_key(key, t).with_particle(kAncestorSlot)).uniform());
  }
  a.push_back(ref_anc);
  return a;
}

}  // namespace

CpfResult cpf(const Model& model, const Parameter& theta, const Observations& y,
              std::size_t particles, const Trajectory& ref, bool ancestor_sampling,
              const SeedKey& key) {
  detail::require(particles >= 1, "cpf: need at least one particle");
  model.check_parameter(theta);
  check_reference(model, y, ref);
  if (ancestor_sampling && !model.spec().has_transition_density) {
    throw UnsupportedOperation("cpf: ancestor sampling needs a transition density");
  }
  const std::size_t horizon = y.horizon();
  CpfSide side{&ref, {}};
  side.tr.noise = ProcessNoise::draw(model, particles, horizon, key);
  start_side(model, theta, side, particles);
  for (std::size_t t = 0; t < horizon; ++t) {
    side.tr.ancestors.push_back(single_side_ancestors(model, theta, side, t, ancestor_sampling, key));
    if (!advance_side(model, theta, y, side, t)) return {ref, std::move(side.tr)};
  }
  const double u = Stream(resample_key(key, horizon)).uniform();
  const std::size_t b = inverse_cdf(side.tr.weights(horizon), u);
  Trajectory path = side.tr.trajectory(b);
  return {std::move(path), std::move(side.tr)};
}

CoupledCpfResult coupled_cpf(const Model& model, const Parameter& theta, const Observations& y,
                             std::size_t particles, const Trajectory& ref,
                             const Trajectory& ref_tilde, const Scheme& scheme,
                             bool ancestor_sampling, const SeedKey& key) {
  detail::require(particles >= 1, "coupled_cpf: need at least one particle");
  model.check_parameter(theta);
  check_reference(model, y, ref);
  check_reference(model, y, ref_tilde);
  if (ancestor_sampling && !model.spec().has_transition_density) {
    throw UnsupportedOperation("coupled_cpf: ancestor sampling needs a transition density");
  }
  const std::size_t horizon = y.horizon();
  const std::size_t n = particles;
  CpfSide one{&ref, {}};
  CpfSide two{&ref_tilde, {}};
  one.tr.noise = ProcessNoise::draw(model, n, horizon, key);
  two.tr.noise = one.tr.noise;
  start_side(model, theta, one, n);
  start_side(model, theta, two, n);

  for (std::size_t t = 0; t < horizon; ++t) {
    const bool alive_one = !one.tr.degenerate;
    const bool alive_two = !two.tr.degenerate;
    if (!alive_one && !alive_two) break;
    if (alive_one && alive_two) {
      const auto w1 = one.tr.weights(t);
      const auto w2 = two.tr.weights(t);
      auto pairs = n > 1 ? coupled_resample(scheme, one.tr.states[t], w1, two.tr.states[t], w2, n - 1,
                                            resample_key(key, t))
                         : AncestorPairs{};
      std::size_t r1 = n - 1, r2 = n - 1;
      if (ancestor_sampling) {
        const auto nu1 = ancestor_weights(model, theta, one.tr, ref, t);
        const auto nu2 = ancestor_weights(model, theta, two.tr, ref_tilde, t);
        const auto p = index_coupled_sample(index_coupled_build(nu1, nu2), 1,
                                            resample_key(key, t).with_particle(kAncestorSlot));
        r1 = p.a[0];
        r2 = p.a_tilde[0];
      }
      pairs.a.push_back(r1);
      pairs.a_tilde.push_back(r2);
      one.tr.ancestors.push_back(std::move(pairs.a));
      two.tr.ancestors.push_back(std::move(pairs.a_tilde));
    } else {
      CpfSide& side = alive_one ? one : two;
      side.tr.ancestors.push_back(single_side_ancestors(model, theta, side, t, ancestor_sampling, key));
    }
    if (!one.tr.degenerate) advance_side(model, theta, y, one, t);
    if (!two.tr.degenerate) advance_side(model, theta, y, two, t);
  }

  CoupledCpfResult out;
  const SeedKey final_key = resample_key(key, horizon);
  if (!one.tr.degenerate && !two.tr.degenerate) {
    const auto pair = coupled_resample(scheme, one.tr.states[horizon], one.tr.weights(horizon),
                                       two.tr.states[horizon], two.tr.weights(horizon), 1, final_key);
    out.first.path = one.tr.trajectory(pair.a[0]);
    out.second.path = two.tr.trajectory(pair.a_tilde[0]);
  } else {
    for (auto* side : {&one, &two}) {
      Trajectory& dst = side == &one ? out.first.path : out.second.path;
      if (side->tr.degenerate) {
        dst = *side->ref;
      } else {
        const double u = Stream(final_key).uniform();
        dst = side->tr.trajectory(inverse_cdf(side->tr.weights(horizon), u));
      }
    }
  }
  out.first.trace = std::move(one.tr);
  out.second.trace = std::move(two.tr);
  return out;
}

}  // namespace coupledpf
