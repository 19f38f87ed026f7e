#include <doctest.h>

#include <cmath>

#include "coupledpf/oracle.hpp"
#include "coupledpf/rhee_glynn.hpp"
#include "coupledpf/stats.hpp"

using namespace coupledpf;

namespace {

const HiddenArModel kAr1(1);
const Parameter kTheta{0.95};

Observations toy_data() { return simulate(kAr1, kTheta, 10, SeedKey{.seed = 200}).observations; }

RgEstimate make_estimate(std::vector<double> h, std::size_t tau) {
  RgEstimate e;
  e.h = std::move(h);
  e.tau = tau;
  e.complete = true;
  return e;
}

}  // namespace

TEST_CASE("truncation weights") {
  CHECK(truncated_weight(TruncationPolicy::none(), 7) == 1.0);
  CHECK(truncated_weight(TruncationPolicy::geometric(0.0), 7) == 1.0);
  CHECK(truncated_weight(TruncationPolicy::geometric(0.025), 2) == doctest::Approx(1.0 / (0.975 * 0.975)));
  CHECK(truncated_weight(TruncationPolicy::fixed(3), 5) == 1.0);
}

TEST_CASE("test functions") {
  Trajectory path{Matrix(3, 2)};
  path.path << 1, 2, 3, 4, 5, 6;
  CHECK(evaluate(TestFunction::mean_per_time, path) == std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(evaluate(TestFunction::second_moment_per_time, path) == std::vector<double>{1, 4, 9, 16, 25, 36});
  CHECK(parse_test_function(test_function_name(TestFunction::second_moment_per_time)) ==
        TestFunction::second_moment_per_time);
  CHECK_THROWS_AS(parse_test_function("cube"), InvalidArgument);
}

TEST_CASE("rao-blackwell average equals the weighted sum over final paths") {
  const auto y = toy_data();
  const auto trace = bootstrap_pf(kAr1, kTheta, y, 12, SeedKey{.seed = 1});
  const auto w = trace.weights(10);
  for (auto h : {TestFunction::mean_per_time, TestFunction::second_moment_per_time}) {
    std::vector<double> brute(11, 0.0);
    for (std::size_t k = 0; k < 12; ++k) {
      const auto v = evaluate(h, trace.trajectory(k));
      for (std::size_t i = 0; i < 11; ++i) brute[i] += w[k] * v[i];
    }
    const auto fast = rao_blackwell_average(h, trace);
    for (std::size_t i = 0; i < 11; ++i) CHECK(fast[i] == doctest::Approx(brute[i]).epsilon(1e-12));
  }
}

TEST_CASE("estimates are reproducible and report their cost") {
  const auto y = toy_data();
  RgOptions opt;
  opt.particles = 32;
  const auto a = rg_estimate(kAr1, kTheta, y, opt, SeedKey{.seed = 2});
  const auto b = rg_estimate(kAr1, kTheta, y, opt, SeedKey{.seed = 2});
  CHECK(a.h == b.h);
  CHECK(a.tau == b.tau);
  REQUIRE(a.complete);
  REQUIRE(a.tau.has_value());
  CHECK(*a.tau >= 1);
  CHECK(a.h.size() == 11);
  CHECK(a.cost_units == a.iterations_run * 32 * 10);

  opt.scheme.kind = SchemeKind::transport;
  CHECK_THROWS_AS(rg_estimate(kAr1, kTheta, y, opt, SeedKey{}), InvalidArgument);
}

TEST_CASE("m = 0 is the plain estimator") {
  const auto y = toy_data();
  RgOptions opt;
  opt.particles = 32;
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto plain = rg_estimate(kAr1, kTheta, y, opt, SeedKey{.seed = 3, .replicate = r});
    const auto trunc = m_truncated_estimate(kAr1, kTheta, y, opt, 0, SeedKey{.seed = 3, .replicate = r});
    for (std::size_t i = 0; i < plain.h.size(); ++i) CHECK(trunc.h[i] == doctest::Approx(plain.h[i]).epsilon(1e-12));
  }
}

TEST_CASE("the iteration cap marks the estimate incomplete") {
  const auto y = toy_data();
  RgOptions opt;
  opt.particles = 32;
  opt.max_iterations = 1;
  opt.scheme.kind = SchemeKind::naive_systematic;
  bool saw_incomplete = false;
  for (std::uint64_t r = 0; r < 10 && !saw_incomplete; ++r) {
    saw_incomplete = !rg_estimate(kAr1, kTheta, y, opt, SeedKey{.seed = 4, .replicate = r}).complete;
  }
  CHECK(saw_incomplete);
}

TEST_CASE("geometric truncation stays unbiased") {
  const auto y = toy_data();
  const auto truth = kalman_smoother(hidden_ar_spec(0.95, 1), y);
  RgOptions opt;
  opt.particles = 64;
  opt.policy = TruncationPolicy::geometric(0.025);
  std::vector<RgEstimate> est;
  for (std::uint64_t r = 0; r < 2000; ++r) est.push_back(rg_estimate(kAr1, kTheta, y, opt, SeedKey{.seed = 5, .replicate = r}));
  const auto s = aggregate(est);
  REQUIRE(s.incomplete == 0);
  for (std::size_t t = 0; t <= 10; ++t) CHECK(std::abs(s.mean[t] - truth.means[t](0)) < 3.0 * s.se[t]);
}

TEST_CASE("aggregation") {
  std::vector<RgEstimate> same(5, make_estimate({1.5, -2.0}, 3));
  const auto s = aggregate(same);
  CHECK(s.se[0] == 0.0);
  CHECK(s.ci_low[1] == -2.0);
  CHECK(s.ci_high[1] == -2.0);
  CHECK(s.tau_mean == 3.0);

  std::vector<RgEstimate> four;
  for (double v : {1.0, 2.0, 3.0, 4.0}) four.push_back(make_estimate({v}, static_cast<std::size_t>(v)));
  const auto f = aggregate(four);
  CHECK(f.mean[0] == 2.5);
  CHECK(f.sd[0] == doctest::Approx(1.2909944487358056));
  CHECK(f.tau_max == 4);
  CHECK_THROWS_AS(aggregate({make_estimate({1.0}, 1)}), InvalidArgument);
}
