#include <doctest.h>

#include <cmath>
#include <limits>

#include "coupledpf/inference.hpp"
#include "coupledpf/oracle.hpp"
#include "coupledpf/stats.hpp"

using namespace coupledpf;

namespace {

const HiddenArModel kAr1(1);

Observations toy_data(std::size_t horizon) {
  return simulate(kAr1, Parameter{0.4}, horizon, SeedKey{.seed = 300}).observations;
}

double flat_prior(const Parameter& th) {
  return std::abs(th[0]) < 1.0 ? 0.0 : -std::numeric_limits<double>::infinity();
}

}  // namespace

TEST_CASE("finite differences of the exact likelihood approach the score") {
  const auto y = toy_data(30);
  const auto ll = [&](double th) { return kalman_filter(hidden_ar_spec(th, 1), y).loglik; };
  const double h = 1e-4, th = 0.4;
  const double fd = (ll(th + h) - ll(th - h)) / (2 * h);
  // five-point stencil as the reference derivative
  const double g = 1e-3;
  const double ref = (-ll(th + 2 * g) + 8 * ll(th + g) - 8 * ll(th - g) + ll(th - 2 * g)) / (12 * g);
  CHECK(std::abs(fd - ref) <= 1e-4 * std::abs(ref));
}

TEST_CASE("fd_score") {
  const auto y = toy_data(20);
  CHECK_THROWS_AS(fd_score(kAr1, Parameter{0.4}, 0, 0.0, y, 16, Scheme{}, SeedKey{}), InvalidArgument);
  const auto r = fd_score(kAr1, Parameter{0.4}, 0, 0.01, y, 16, Scheme{}, SeedKey{.seed = 1});
  CHECK(r.estimate == doctest::Approx((r.loglik_plus - r.loglik_minus) / 0.02));

  auto variance = [&](SchemeKind kind) {
    std::vector<double> est;
    for (std::uint64_t i = 0; i < 100; ++i) {
      est.push_back(fd_score(kAr1, Parameter{0.4}, 0, 0.001, y, 64, Scheme{.kind = kind},
                             SeedKey{.seed = 2, .replicate = i}).estimate);
    }
    return stats::variance(est);
  };
  CHECK(variance(SchemeKind::independent) >= 10.0 * variance(SchemeKind::index_coupled));
}

TEST_CASE("correlation gain") {
  const std::vector<double> x{1, -1, 1, -1}, z{1, 1, -1, -1};
  std::vector<double> y(4);
  for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = 0.9 * x[static_cast<std::size_t>(i)] + std::sqrt(0.19) * z[static_cast<std::size_t>(i)];
  const auto g = correlation_gain(x, y);
  CHECK(g.rho == doctest::Approx(0.9));
  CHECK(g.gain == doctest::Approx(10.0));

  const auto a = unit_normals(SeedKey{.seed = 3}, 2000);
  const auto b = unit_normals(SeedKey{.seed = 4}, 2000);
  const auto ind = correlation_gain(a, b);
  CHECK(std::abs(ind.rho) < 3.0 / std::sqrt(2000.0));
  CHECK(std::abs(ind.gain - 1.0) < 0.1);
  CHECK_THROWS_AS(correlation_gain(std::vector<double>{1, 2}, std::vector<double>{2, 1}), InvalidArgument);
}

TEST_CASE("acceptance ratio is antisymmetric") {
  const double fwd = log_acceptance_ratio(-10.3, -0.2, -9.7, -1.4);
  const double bwd = log_acceptance_ratio(-9.7, -1.4, -10.3, -0.2);
  CHECK(std::abs(fwd + bwd) < 1e-12);
}

TEST_CASE("short pmmh run") {
  const auto y = toy_data(10);
  PmmhOptions opt;
  opt.proposal_sd = {0.1};
  opt.iterations = 10;
  opt.particles = 8;
  const auto chain = correlated_pmmh(kAr1, flat_prior, y, Parameter{0.4}, opt, SeedKey{.seed = 5});
  CHECK(chain.theta.rows() == 10);
  CHECK(chain.loglik.size() == 10);
  for (Eigen::Index i = 0; i < 10; ++i) CHECK(std::abs(chain.theta(i, 0)) < 1.0);

  opt.scheme.kind = SchemeKind::transport;
  CHECK_THROWS_AS(correlated_pmmh(kAr1, flat_prior, y, Parameter{0.4}, opt, SeedKey{}), InvalidArgument);
}

TEST_CASE("correlating the noise raises acceptance") {
  const auto y = toy_data(50);
  PmmhOptions opt;
  opt.proposal_sd = {0.05};
  opt.iterations = 2000;
  opt.particles = 8;
  opt.rho = 0.99;
  const auto correlated = correlated_pmmh(kAr1, flat_prior, y, Parameter{0.4}, opt, SeedKey{.seed = 6});
  opt.rho = 0.0;
  opt.scheme.kind = SchemeKind::independent;
  const auto standard = correlated_pmmh(kAr1, flat_prior, y, Parameter{0.4}, opt, SeedKey{.seed = 6});
  CHECK(correlated.acceptance_rate() > standard.acceptance_rate());
}

TEST_CASE("effective sample size") {
  const auto iid = unit_normals(SeedKey{.seed = 7}, 10000);
  const auto e = ess(iid);
  CHECK(e.ess > 8000.0);
  CHECK(e.ess < 12000.0);

  const auto z = unit_normals(SeedKey{.seed = 8}, 100000);
  std::vector<double> ar(z.size());
  ar[0] = z[0] / std::sqrt(1 - 0.81);
  for (std::size_t i = 1; i < z.size(); ++i) ar[i] = 0.9 * ar[i - 1] + z[i];
  const double expect = 100000.0 * 0.1 / 1.9;
  CHECK(ess(ar).ess == doctest::Approx(expect).epsilon(0.2));

  std::vector<double> alt(1000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0 ? 1.0 : -1.0;
  CHECK(ess(alt).ess >= 1000.0);

  CHECK_THROWS_AS(ess(std::vector<double>(50, 1.0)), InvalidArgument);
  CHECK(ess(std::vector<double>(200, 1.0)).constant);
}

TEST_CASE("chain summary standard errors") {
  const auto iid = unit_normals(SeedKey{.seed = 9}, 10000);
  const auto s = summarize_chain(iid);
  CHECK(s.mcse_mean == doctest::Approx(1.0 / 100.0).epsilon(0.15));
  // sd of a sample sd from n normals is about 1 / sqrt(2 n)
  CHECK(s.mcse_sd == doctest::Approx(1.0 / std::sqrt(20000.0)).epsilon(0.25));
}
