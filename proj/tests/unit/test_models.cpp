#include <doctest.h>

#include <cmath>
#include <numbers>

#include "coupledpf/models.hpp"
#include "coupledpf/stats.hpp"

using namespace coupledpf;

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
using V = std::vector<double>;
}  // namespace

TEST_CASE("init_state") {
  HiddenArModel ar2(2);
  CHECK(ar2.init_state(V{0, 0}, Parameter{0.4}) == V{0, 0});
  UnlikelyObservationModel unlikely(10);
  CHECK(unlikely.init_state(V{1.0}, {})[0] == doctest::Approx(0.1));
  GrowthModel growth;
  CHECK(growth.init_state(V{1.0}, {})[0] == doctest::Approx(std::sqrt(2.0)));

  std::vector<double> x0;
  for (double u : unit_normals(SeedKey{.seed = 4}, 100000)) x0.push_back(growth.init_state(V{u}, {})[0]);
  CHECK(stats::variance(x0) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("propagate") {
  HiddenArModel ar1(1);
  CHECK(ar1.propagate(V{1.0}, V{0.0}, Parameter{0.5}, 1)[0] == doctest::Approx(0.5));
  HiddenArModel ar2(2);
  const auto x = ar2.propagate(V{1.0, 0.0}, V{0.0, 0.0}, Parameter{0.4}, 1);
  CHECK(x[0] == doctest::Approx(0.4));
  CHECK(x[1] == doctest::Approx(0.16));
  HiddenArModel ar3(3);
  const Matrix a = ar3.transition_matrix(0.5);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(a(i, j) == doctest::Approx(std::pow(0.5, std::abs(i - j) + 1)));
  }
  GrowthModel growth;
  CHECK(growth.propagate(V{0.0}, V{0.0}, {}, 1)[0] == doctest::Approx(8.0));
  CHECK(ar2.propagate(V{1.0, 0.0}, V{0.3, -0.2}, Parameter{0.4}, 1) ==
        ar2.propagate(V{1.0, 0.0}, V{0.3, -0.2}, Parameter{0.4}, 1));
}

TEST_CASE("log_measurement") {
  HiddenArModel ar1(1);
  CHECK(ar1.log_measurement(V{0.7}, V{0.7}, Parameter{0.4}, 1) == doctest::Approx(-0.5 * kLog2Pi));
  HiddenArModel ar5(5);
  const V x{1, 2, 3, 4, 5};
  CHECK(ar5.log_measurement(x, x, Parameter{0.4}, 1) == doctest::Approx(-2.5 * kLog2Pi));
  GrowthModel growth;
  CHECK(growth.log_measurement(V{0.0}, V{0.0}, {}, 1) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi * 10.0)));
  UnlikelyObservationModel unlikely(4);
  CHECK(unlikely.log_measurement(V{100.0}, V{0.0}, {}, 2) == 0.0);
  CHECK(unlikely.log_measurement(V{0.2}, V{0.2}, {}, 4) ==
        doctest::Approx(-0.5 * kLog2Pi - std::log(0.1)));
}

TEST_CASE("log_transition") {
  HiddenArModel ar1(1);
  CHECK(ar1.log_transition(V{2.0}, V{1.0}, Parameter{0.5}, 1) == doctest::Approx(-0.5 * kLog2Pi));
  CHECK(ar1.log_transition(V{5.0}, V{0.0}, Parameter{0.0}, 1) == doctest::Approx(-0.5 * kLog2Pi));
  GrowthModel growth;
  const double mean = 0.5 + 25.0 / 2.0 + 8.0 * std::cos(1.2);
  CHECK(growth.log_transition(V{1.0}, V{mean}, {}, 2) == doctest::Approx(-0.5 * kLog2Pi));
  PlanktonModel plankton;
  CHECK_THROWS_AS((void)plankton.log_transition(V{1, 1}, V{1, 1}, plankton.default_theta(), 1),
                  UnsupportedOperation);
}

TEST_CASE("plankton integrator") {
  const Parameter no_grazing{0.7, 0.5, 0.0, 0.3, 0.1, 0.1};
  const auto [p, z] = plankton_step(2.0, 1.0, 0.0, no_grazing, 0.01);
  CHECK(p == 2.0);

  // predator equilibrium: e c p = m_l + m_q z
  const Parameter th{0.7, 0.5, 0.25, 0.3, 0.1, 0.1};
  const double z0 = 1.0;
  const double p0 = (0.1 + 0.1 * z0) / (0.3 * 0.25);
  const auto [p1, z1] = plankton_rk4_substep(p0, z0, 0.9, th, 1e-3);
  CHECK(std::abs(z1 - z0) <= 1e-3 * z0);
  CHECK(p1 > 0.0);

  // fourth-order convergence: halving the step shrinks the error about 16-fold
  const auto ref = plankton_step(2.0, 1.5, 0.4, th, 1e-4);
  const auto coarse = plankton_step(2.0, 1.5, 0.4, th, 0.1);
  const auto fine = plankton_step(2.0, 1.5, 0.4, th, 0.05);
  const double e1 = std::abs(coarse.first - ref.first) + std::abs(coarse.second - ref.second);
  const double e2 = std::abs(fine.first - ref.first) + std::abs(fine.second - ref.second);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);

  CHECK_THROWS_AS(plankton_step(-1.0, 1.0, 0.0, th, 0.01), InvalidArgument);
  CHECK_THROWS_AS(plankton_step(1.0, 1.0, 0.0, th, 0.0), InvalidArgument);
  PlanktonModel plankton;
  CHECK_THROWS_AS((void)plankton.propagate(V{1.0, 1.0}, V{1e6}, th, 1), ModelError);
}

TEST_CASE("dimension checks and factory") {
  HiddenArModel ar2(2);
  CHECK_THROWS_AS((void)ar2.propagate(V{1.0}, V{0.0, 0.0}, Parameter{0.4}, 1), DimensionError);
  CHECK_THROWS_AS((void)make_model("nope"), InvalidArgument);
  CHECK(make_model("hidden-ar", {.dim = 3})->spec().dim_state == 3);
  CHECK(make_model("plankton")->spec().has_transition_density == false);
}

TEST_CASE("simulate") {
  HiddenArModel ar5(5);
  const SeedKey key{.seed = 9};
  const auto a = simulate(ar5, Parameter{0.4}, 7, key);
  const auto b = simulate(ar5, Parameter{0.4}, 7, key);
  CHECK(a.states.rows() == 8);
  CHECK(a.states.cols() == 5);
  CHECK(a.observations.horizon() == 7);
  CHECK(a.observations.dim() == 5);
  CHECK((a.states.array() == b.states.array()).all());
  CHECK((a.observations.matrix().array() == b.observations.matrix().array()).all());

  std::vector<std::vector<double>> zero_steps(8, V(5, 0.0)), zero_obs(7, V(5, 0.0));
  const auto z = simulate_with_noise(ar5, Parameter{0.4}, zero_steps, zero_obs);
  CHECK(z.states.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.observations.matrix().cwiseAbs().maxCoeff() == 0.0);
}
