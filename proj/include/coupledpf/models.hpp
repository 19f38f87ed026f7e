#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "coupledpf/rng.hpp"
#include "coupledpf/types.hpp"

namespace coupledpf {

/// Static description of a state space model written as deterministic
/// functions of standard-normal noise blocks.
struct ModelSpec {
  std::string id;
  std::size_t dim_state = 1;
  std::size_t dim_obs = 1;
  std::size_t dim_theta = 0;
  std::size_t init_noise_dim = 1;  ///< size of U_0^k
  std::size_t step_noise_dim = 1;  ///< size of U_t^k, t >= 1
  bool has_transition_density = true;
  /// Upper bound on g(y | x, theta), when the model has one.
  std::optional<double> measurement_bound;
};

/// State space model contract. Public entry points validate dimensions and
/// forward to the model-specific implementations; every function is pure.
///
/// Time indices: `propagate(x, u, theta, t)` produces x_t from x_{t-1};
/// `log_measurement(y, x, theta, t)` scores y_t given x_t, 1 <= t <= T.
class Model {
 public:
  virtual ~Model() = default;

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] virtual Parameter default_theta() const = 0;
  /// Throws InvalidArgument when theta is outside the model's domain.
  void check_parameter(const Parameter& theta) const;

  /// x_0 = M(u, theta).
  void init_state(ConstSpan u, const Parameter& theta, MutSpan out) const;
  /// x_t = F(x_{t-1}, u, theta); throws ModelError on non-finite output.
  void propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t t,
                 MutSpan out) const;
  /// log g(y_t | x_t, theta); -inf allowed.
  [[nodiscard]] double log_measurement(ConstSpan y, ConstSpan x, const Parameter& theta,
                                       std::size_t t) const;
  /// log f(x_t | x_{t-1}, theta); UnsupportedOperation when the density is intractable.
  [[nodiscard]] double log_transition(ConstSpan x, ConstSpan x_next, const Parameter& theta,
                                      std::size_t t) const;
  /// y_t given x_t and d_y standard normals.
  void sample_measurement(ConstSpan x, ConstSpan v, const Parameter& theta, std::size_t t,
                          MutSpan out) const;

  // Allocating conveniences.
  [[nodiscard]] std::vector<double> init_state(ConstSpan u, const Parameter& theta) const;
  [[nodiscard]] std::vector<double> propagate(ConstSpan x, ConstSpan u, const Parameter& theta,
                                              std::size_t t) const;

 protected:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {}

  virtual void do_check_parameter(const Parameter& /*theta*/) const {}
  virtual void do_init_state(ConstSpan u, const Parameter& theta, MutSpan out) const = 0;
  virtual void do_propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t t,
                            MutSpan out) const = 0;
  virtual double do_log_measurement(ConstSpan y, ConstSpan x, const Parameter& theta,
                                    std::size_t t) const = 0;
  virtual double do_log_transition(ConstSpan x, ConstSpan x_next, const Parameter& theta,
                                   std::size_t t) const;
  virtual void do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter& theta,
                                     std::size_t t, MutSpan out) const = 0;

 private:
  ModelSpec spec_;
};

using ModelPtr = std::shared_ptr<const Model>;

/// Hidden auto-regressive model: x_0 ~ N(0, I), x_t ~ N(A x_{t-1}, I) with
/// A_ij = theta^{|i-j|+1}, y_t ~ N(x_t, I). d_y = d_x; theta is scalar.
class HiddenArModel final : public Model {
 public:
  explicit HiddenArModel(std::size_t dim = 1);
  [[nodiscard]] Parameter default_theta() const override { return Parameter{0.4}; }
  /// The transition matrix A(theta).
  [[nodiscard]] Matrix transition_matrix(double theta) const;

 private:
  void do_init_state(ConstSpan u, const Parameter& theta, MutSpan out) const override;
  void do_propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t t,
                    MutSpan out) const override;
  double do_log_measurement(ConstSpan y, ConstSpan x, const Parameter& theta,
                            std::size_t t) const override;
  double do_log_transition(ConstSpan x, ConstSpan x_next, const Parameter& theta,
                           std::size_t t) const override;
  void do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter& theta, std::size_t t,
                             MutSpan out) const override;
  void do_check_parameter(const Parameter& theta) const override;
};

/// Scalar AR(1) observed once, at the final time:
/// x_0 ~ N(0, tau0^2), x_t = eta x_{t-1} + N(0, tau^2), y_T ~ N(x_T, sigma^2).
/// log_measurement is 0 at every t != T. No parameters.
class UnlikelyObservationModel final : public Model {
 public:
  static constexpr double kInitSd = 0.1;
  static constexpr double kEta = 0.9;
  static constexpr double kStepSd = 0.1;
  static constexpr double kObsSd = 0.1;

  explicit UnlikelyObservationModel(std::size_t observation_time = 10);
  [[nodiscard]] Parameter default_theta() const override { return {}; }
  [[nodiscard]] std::size_t observation_time() const { return observation_time_; }

 private:
  void do_init_state(ConstSpan u, const Parameter& theta, MutSpan out) const override;
  void do_propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t t,
                    MutSpan out) const override;
  double do_log_measurement(ConstSpan y, ConstSpan x, const Parameter& theta,
                            std::size_t t) const override;
  double do_log_transition(ConstSpan x, ConstSpan x_next, const Parameter& theta,
                           std::size_t t) const override;
  void do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter& theta, std::size_t t,
                             MutSpan out) const override;

  std::size_t observation_time_;
};

/// Nonlinear growth model: x_0 ~ N(0, 2),
/// x_t = 0.5 x + 25 x / (1 + x^2) + 8 cos(1.2 (t - 1)) + N(0, 1),
/// y_t ~ N(x_t^2 / 20, 10). No parameters.
class GrowthModel final : public Model {
 public:
  GrowthModel();
  [[nodiscard]] Parameter default_theta() const override { return {}; }
  [[nodiscard]] static double transition_mean(double x, std::size_t t);

 private:
  void do_init_state(ConstSpan u, const Parameter& theta, MutSpan out) const override;
  void do_propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t t,
                    MutSpan out) const override;
  double do_log_measurement(ConstSpan y, ConstSpan x, const Parameter& theta,
                            std::size_t t) const override;
  double do_log_transition(ConstSpan x, ConstSpan x_next, const Parameter& theta,
                           std::size_t t) const override;
  void do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter& theta, std::size_t t,
                             MutSpan out) const override;
};

/// Phytoplankton-zooplankton model with a Lotka-Volterra transition.
/// State (p, z); theta = (mu_alpha, sigma_alpha, c, e, m_l, m_q).
/// log p_0, log z_0 ~ N(log 2, 1); each day alpha ~ N(mu_alpha, sigma_alpha^2)
/// (one noise coordinate) and the ODE is integrated by fixed-step RK4;
/// log y_t ~ N(log p_t, 0.2^2). Transition density is intractable.
class PlanktonModel final : public Model {
 public:
  static constexpr double kSubstep = 0.01;
  static constexpr double kObsSd = 0.2;

  PlanktonModel();
  [[nodiscard]] Parameter default_theta() const override {
    return Parameter{0.7, 0.5, 0.25, 0.3, 0.1, 0.1};
  }

 private:
  void do_check_parameter(const Parameter& theta) const override;
  void do_init_state(ConstSpan u, const Parameter& theta, MutSpan out) const override;
  void do_propagate(ConstSpan x, ConstSpan u, const Parameter& theta, std::size_t t,
                    MutSpan out) const override;
  double do_log_measurement(ConstSpan y, ConstSpan x, const Parameter& theta,
                            std::size_t t) const override;
  void do_sample_measurement(ConstSpan x, ConstSpan v, const Parameter& theta, std::size_t t,
                             MutSpan out) const override;
};

/// One RK4 substep of dp/dt = alpha p - c p z, dz/dt = e c p z - m_l z - m_q z^2.
std::pair<double, double> plankton_rk4_substep(double p, double z, double alpha,
                                               const Parameter& theta, double h);

/// Integrates the plankton ODE over `duration` (one day by default) with fixed
/// substep `dt`, alpha held constant. Throws ModelError on non-finite output.
std::pair<double, double> plankton_step(double p, double z, double alpha, const Parameter& theta,
                                        double dt, double duration = 1.0);

struct ModelOptions {
  std::size_t dim = 1;        ///< hidden-ar state dimension
  std::size_t horizon = 10;   ///< unlikely-obs observation time
};

/// Builds a model from its id: "hidden-ar", "unlikely-obs", "growth", "plankton".
ModelPtr make_model(std::string_view id, const ModelOptions& options = {});

/// Simulated path: (T+1) x d_x states and T x d_y observations.
struct SimulatedData {
  Matrix states;
  Observations observations;
};

/// Chains init_state / propagate / sample_measurement with noise drawn from
/// streams under `key` (roles init, propagate, measure; particle index 0).
SimulatedData simulate(const Model& model, const Parameter& theta, std::size_t horizon,
                       const SeedKey& key);

/// Same, with caller-provided noise: init block, T step blocks and T measurement blocks.
SimulatedData simulate_with_noise(const Model& model, const Parameter& theta,
                                  const std::vector<std::vector<double>>& init_and_step_noise,
                                  const std::vector<std::vector<double>>& measurement_noise);

}  // namespace coupledpf
