#include "coupledpf/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace coupledpf {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

bool all_finite(ConstSpan v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void check_dims(bool ok, const std::string& id, const char* what) {
  if (!ok) throw DimensionError(id + what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Model: dimension checks around the model-specific implementations

void Model::check_parameter(const Parameter& theta) const {
  if (theta.size() != spec_.dim_theta) {
    throw DimensionError(spec_.id + ": expected " + std::to_string(spec_.dim_theta) +
                         " parameter(s), got " + std::to_string(theta.size()));
  }
  do_check_parameter(theta);
}

void Model::init_state(ConstSpan u, const Parameter& theta, MutSpan out) const {
  check_dims(u.size() == spec_.init_noise_dim, spec_.id, ": init noise size mismatch");
  check_dims(out.size() == spec_.dim_state, spec_.id, ": state size mismatch");
  do_init_state(u, theta, out);
}

void Model::propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t t,
                      MutSpan out) const {
  check_dims(x.size() == spec_.dim_state, spec_.id, ": state size mismatch");
  check_dims(u.size() == spec_.step_noise_dim, spec_.id, ": step noise size mismatch");
  check_dims(out.size() == spec_.dim_state, spec_.id, ": state size mismatch");
  do_propagate(x, u, theta, t, out);
  if (!all_finite(out)) {
    throw ModelError(spec_.id + ": non-finite state after propagation at t=" + std::to_string(t));
  }
}

double Model::log_measurement(ConstSpan y, ConstSpan x, const Parameter& theta,
                              std::size_t t) const {
  check_dims(y.size() == spec_.dim_obs, spec_.id, ": observation size mismatch");
  check_dims(x.size() == spec_.dim_state, spec_.id, ": state size mismatch");
  return do_log_measurement(y, x, theta, t);
}

double Model::log_transition(ConstSpan x, ConstSpan x_next, const Parameter& theta,
                             std::size_t t) const {
  if (!spec_.has_transition_density) {
    throw UnsupportedOperation(spec_.id + ": transition density is not available");
  }
  check_dims(x.size() == spec_.dim_state && x_next.size() == spec_.dim_state, spec_.id, ": state size mismatch");
  return do_log_transition(x, x_next, theta, t);
}

double Model::do_log_transition(ConstSpan, ConstSpan, const Parameter&, std::size_t) const {
  throw UnsupportedOperation(spec_.id + ": transition density is not available");
}

void Model::sample_measurement(ConstSpan x, ConstSpan v, const Parameter& theta, std::size_t t,
                               MutSpan out) const {
  check_dims(x.size() == spec_.dim_state, spec_.id, ": state size mismatch");
  check_dims(v.size() == spec_.dim_obs && out.size() == spec_.dim_obs, spec_.id, ": observation size mismatch");
  do_sample_measurement(x, v, theta, t, out);
}

std::vector<double> Model::init_state(ConstSpan u, const Parameter& theta) const {
  std::vector<double> out(spec_.dim_state);
  init_state(u, theta, out);
  return out;
}

std::vector<double> Model::propagate(ConstSpan x, ConstSpan u, const Parameter& theta,
                                     std::size_t t) const {
  std::vector<double> out(spec_.dim_state);
  propagate(x, u, theta, t, out);
  return out;
}

// ---------------------------------------------------------------------------
// hidden-ar

HiddenArModel::HiddenArModel(std::size_t dim)
    : Model(ModelSpec{.id = "hidden-ar",
                      .dim_state = dim,
                      .dim_obs = dim,
                      .dim_theta = 1,
                      .init_noise_dim = dim,
                      .step_noise_dim = dim,
                      .has_transition_density = true,
                      .measurement_bound = std::exp(-0.5 * static_cast<double>(dim) * kLog2Pi)}) {
  detail::require(dim >= 1, "hidden-ar: dimension must be >= 1");
}

void HiddenArModel::do_check_parameter(const Parameter& theta) const {
  detail::require(std::isfinite(theta[0]), "hidden-ar: theta must be finite");
}

Matrix HiddenArModel::transition_matrix(double theta) const {
  const auto d = static_cast<Eigen::Index>(spec().dim_state);
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      a(i, j) = std::pow(theta, static_cast<double>(std::abs(i - j) + 1));
    }
  }
  return a;
}

void HiddenArModel::do_init_state(ConstSpan u, const Parameter&, MutSpan out) const {
  std::copy(u.begin(), u.end(), out.begin());
}

void HiddenArModel::do_propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t,
                                 MutSpan out) const {
  const std::size_t d = x.size();
  if (d == 1) {
    out[0] = theta[0] * x[0] + u[0];
    return;
  }
  for (std::size_t i = 0; i < d; ++i) {
    double acc = u[i];
    for (std::size_t j = 0; j < d; ++j) {
      const auto lag = static_cast<double>((i > j ? i - j : j - i) + 1);
      acc += std::pow(theta[0], lag) * x[j];
    }
    out[i] = acc;
  }
}

double HiddenArModel::do_log_measurement(ConstSpan y, ConstSpan x, const Parameter&,
                                         std::size_t) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += log_normal_pdf(y[i], x[i], 1.0);
  return acc;
}

double HiddenArModel::do_log_transition(ConstSpan x, ConstSpan x_next, const Parameter& theta,
                                        std::size_t t) const {
  std::vector<double> zero(x.size(), 0.0);
  std::vector<double> mean(x.size());
  do_propagate(x, zero, theta, t, mean);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += log_normal_pdf(x_next[i], mean[i], 1.0);
  return acc;
}

void HiddenArModel::do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter&, std::size_t,
                                          MutSpan out) const {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + v[i];
}

// ---------------------------------------------------------------------------
// unlikely-obs

UnlikelyObservationModel::UnlikelyObservationModel(std::size_t observation_time)
    : Model(ModelSpec{.id = "unlikely-obs",
                      .dim_state = 1,
                      .dim_obs = 1,
                      .dim_theta = 0,
                      .init_noise_dim = 1,
                      .step_noise_dim = 1,
                      .has_transition_density = true,
                      .measurement_bound = std::max(1.0, 1.0 / (kObsSd * std::sqrt(2.0 * std::numbers::pi)))}),
      observation_time_(observation_time) {
  detail::require(observation_time >= 1, "unlikely-obs: observation time must be >= 1");
}

void UnlikelyObservationModel::do_init_state(ConstSpan u, const Parameter&, MutSpan out) const {
  out[0] = kInitSd * u[0];
}

void UnlikelyObservationModel::do_propagate(ConstSpan x, ConstSpan u, const Parameter&, std::size_t,
                                            MutSpan out) const {
  out[0] = kEta * x[0] + kStepSd * u[0];
}

double UnlikelyObservationModel::do_log_measurement(ConstSpan y, ConstSpan x, const Parameter&,
                                                    std::size_t t) const {
  if (t != observation_time_) return 0.0;
  return log_normal_pdf(y[0], x[0], kObsSd * kObsSd);
}

double UnlikelyObservationModel::do_log_transition(ConstSpan x, ConstSpan x_next, const Parameter&,
                                                   std::size_t) const {
  return log_normal_pdf(x_next[0], kEta * x[0], kStepSd * kStepSd);
}

void UnlikelyObservationModel::do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter&,
                                                     std::size_t t, MutSpan out) const {
  out[0] = t == observation_time_ ? x[0] + kObsSd * v[0] : 0.0;
}

// ---------------------------------------------------------------------------
// growth

GrowthModel::GrowthModel()
    : Model(ModelSpec{.id = "growth",
                      .dim_state = 1,
                      .dim_obs = 1,
                      .dim_theta = 0,
                      .init_noise_dim = 1,
                      .step_noise_dim = 1,
                      .has_transition_density = true,
                      .measurement_bound = 1.0 / std::sqrt(2.0 * std::numbers::pi * 10.0)}) {}

double GrowthModel::transition_mean(double x, std::size_t t) {
  return 0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * std::cos(1.2 * (static_cast<double>(t) - 1.0));
}

void GrowthModel::do_init_state(ConstSpan u, const Parameter&, MutSpan out) const {
  out[0] = std::numbers::sqrt2 * u[0];
}

void GrowthModel::do_propagate(ConstSpan x, ConstSpan u, const Parameter&, std::size_t t,
                               MutSpan out) const {
  out[0] = transition_mean(x[0], t) + u[0];
}

double GrowthModel::do_log_measurement(ConstSpan y, ConstSpan x, const Parameter&,
                                       std::size_t) const {
  return log_normal_pdf(y[0], x[0] * x[0] / 20.0, 10.0);
}

double GrowthModel::do_log_transition(ConstSpan x, ConstSpan x_next, const Parameter&,
                                      std::size_t t) const {
  return log_normal_pdf(x_next[0], transition_mean(x[0], t), 1.0);
}

void GrowthModel::do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter&, std::size_t,
                                        MutSpan out) const {
  out[0] = x[0] * x[0] / 20.0 + std::sqrt(10.0) * v[0];
}

// ---------------------------------------------------------------------------
// plankton

std::pair<double, double> plankton_rk4_substep(double p, double z, double alpha,
                                               const Parameter& theta, double h) {
  const double c = theta[2], e = theta[3], ml = theta[4], mq = theta[5];
  auto deriv = [&](double pp, double zz) {
    return std::pair{alpha * pp - c * pp * zz, e * c * pp * zz - ml * zz - mq * zz * zz};
  };
  const auto [k1p, k1z] = deriv(p, z);
  const auto [k2p, k2z] = deriv(p + 0.5 * h * k1p, z + 0.5 * h * k1z);
  const auto [k3p, k3z] = deriv(p + 0.5 * h * k2p, z + 0.5 * h * k2z);
  const auto [k4p, k4z] = deriv(p + h * k3p, z + h * k3z);
  return {p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
          z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)};
}

std::pair<double, double> plankton_step(double p, double z, double alpha, const Parameter& theta,
                                        double dt, double duration) {
  detail::require(dt > 0.0 && duration > 0.0, "plankton_step: dt and duration must be positive");
  detail::require(p >= 0.0 && z >= 0.0, "plankton_step: populations must be non-negative");
  detail::require_dims(theta.size() == 6, "plankton_step: theta must have 6 entries");
  const auto steps = static_cast<long>(std::llround(duration / dt));
  detail::require(steps >= 1, "plankton_step: dt larger than the integration window");
  for (long i = 0; i < steps; ++i) {
    std::tie(p, z) = plankton_rk4_substep(p, z, alpha, theta, dt);
  }
  if (!std::isfinite(p) || !std::isfinite(z)) {
    throw ModelError("plankton: ODE integration blew up");
  }
  return {p, z};
}

PlanktonModel::PlanktonModel()
    : Model(ModelSpec{.id = "plankton",
                      .dim_state = 2,
                      .dim_obs = 1,
                      .dim_theta = 6,
                      .init_noise_dim = 2,
                      .step_noise_dim = 1,
                      .has_transition_density = false,
                      .measurement_bound = std::nullopt}) {}

void PlanktonModel::do_check_parameter(const Parameter& theta) const {
  detail::require(theta[1] >= 0.0, "plankton: sigma_alpha must be non-negative");
  for (std::size_t i = 2; i < 6; ++i) {
    detail::require(theta[i] >= 0.0, "plankton: rates c, e, m_l, m_q must be non-negative");
  }
}

void PlanktonModel::do_init_state(ConstSpan u, const Parameter&, MutSpan out) const {
  out[0] = std::exp(std::numbers::ln2 + u[0]);
  out[1] = std::exp(std::numbers::ln2 + u[1]);
}

void PlanktonModel::do_propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t,
                                 MutSpan out) const {
  const double alpha = theta[0] + theta[1] * u[0];
  const auto [p, z] = plankton_step(std::max(x[0], 0.0), std::max(x[1], 0.0), alpha, theta,
                                    kSubstep);
  out[0] = p;
  out[1] = z;
}

double PlanktonModel::do_log_measurement(ConstSpan y, ConstSpan x, const Parameter&,
                                         std::size_t) const {
  if (y[0] <= 0.0 || x[0] <= 0.0) return -std::numeric_limits<double>::infinity();
  const double log_y = std::log(y[0]);
  return log_normal_pdf(log_y, std::log(x[0]), kObsSd * kObsSd) - log_y;
}

void PlanktonModel::do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter&, std::size_t,
                                          MutSpan out) const {
  out[0] = std::exp(std::log(x[0]) + kObsSd * v[0]);
}

// ---------------------------------------------------------------------------

ModelPtr make_model(std::string_view id, const ModelOptions& options) {
  if (id == "hidden-ar") return std::make_shared<HiddenArModel>(options.dim);
  if (id == "unlikely-obs") return std::make_shared<UnlikelyObservationModel>(options.horizon);
  if (id == "growth") return std::make_shared<GrowthModel>();
  if (id == "plankton") return std::make_shared<PlanktonModel>();
  throw InvalidArgument("unknown model id '" + std::string(id) +
                        "' (expected hidden-ar, unlikely-obs, growth or plankton)");
}

SimulatedData simulate_with_noise(const Model& model, const Parameter& theta,
                                  const std::vector<std::vector<double>>& state_noise,
                                  const std::vector<std::vector<double>>& measurement_noise) {
  model.check_parameter(theta);
  const std::size_t horizon = measurement_noise.size();
  detail::require(horizon >= 1, "simulate: horizon must be >= 1");
  detail::require_dims(state_noise.size() == horizon + 1, "simulate: need T+1 state noise blocks");
  const auto& spec = model.spec();
  Matrix states(static_cast<Eigen::Index>(horizon + 1), static_cast<Eigen::Index>(spec.dim_state));
  Matrix obs(static_cast<Eigen::Index>(horizon), static_cast<Eigen::Index>(spec.dim_obs));
  model.init_state(state_noise[0], theta, row_span(states, 0));
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    model.propagate(row_span(states, r - 1), state_noise[t], theta, t, row_span(states, r));
    model.sample_measurement(row_span(states, r), measurement_noise[t - 1], theta, t,
                             row_span(obs, r - 1));
  }
  return {std::move(states), Observations(std::move(obs))};
}

SimulatedData simulate(const Model& model, const Parameter& theta, std::size_t horizon,
                       const SeedKey& key) {
  detail::require(horizon >= 1, "simulate: horizon must be >= 1");
  const auto& spec = model.spec();
  std::vector<std::vector<double>> state_noise(horizon + 1);
  std::vector<std::vector<double>> measurement_noise(horizon);
  state_noise[0] = unit_normals(key.with_role(Role::init).with_time(0), spec.init_noise_dim);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto tt = static_cast<std::uint32_t>(t);
    state_noise[t] = unit_normals(key.with_role(Role::propagate).with_time(tt), spec.step_noise_dim);
    measurement_noise[t - 1] = unit_normals(key.with_role(Role::measure).with_time(tt), spec.dim_obs);
  }
  return simulate_with_noise(model, theta, state_noise, measurement_noise);
}

}  // namespace coupledpf
