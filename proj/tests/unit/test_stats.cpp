#include <doctest.h>

#include <cmath>
#include <limits>

#include "coupledpf/errors.hpp"
#include "coupledpf/stats.hpp"

using namespace coupledpf;

TEST_CASE("log-sum-exp") {
  const std::vector<double> two{0.0, 0.0};
  CHECK(stats::log_sum_exp(two) == doctest::Approx(std::log(2.0)));
  const std::vector<double> far{-1000.0, -1000.0 + std::log(3.0)};
  CHECK(stats::log_sum_exp(far) == doctest::Approx(-1000.0 + std::log(4.0)));
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> empty_mass{-inf, -inf};
  CHECK(stats::log_sum_exp(empty_mass) == -inf);
}

TEST_CASE("weight normalization survives extreme log-weights") {
  std::vector<double> lw{-700.0, -701.0, -1400.0};
  const double total = stats::normalize_log_weights(lw);
  CHECK(total == doctest::Approx(-700.0 + std::log1p(std::exp(-1.0))));
  const auto w = stats::to_weights(lw);
  CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0));
  CHECK(w[0] / w[1] == doctest::Approx(std::exp(1.0)));

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dead{-inf, -inf};
  CHECK(stats::normalize_log_weights(dead) == -inf);
}

TEST_CASE("moments") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(stats::mean(x) == 2.5);
  CHECK(stats::sd(x) == doctest::Approx(1.2909944487358056));
  CHECK(stats::median(x) == 2.5);
  CHECK(stats::median({5, 1, 3}) == 3);
  const std::vector<double> y{2, 4, 6, 8};
  CHECK(stats::correlation(x, y) == doctest::Approx(1.0));
  const std::vector<double> flat{1, 1, 1, 1};
  CHECK_THROWS_AS((void)stats::correlation(x, flat), InvalidArgument);
}

TEST_CASE("kolmogorov-smirnov") {
  CHECK(stats::ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(stats::ks_statistic({0, 1}, {10, 11}) == 1.0);
  CHECK(stats::kolmogorov_pvalue(0.0, 100) == doctest::Approx(1.0));
  CHECK(stats::kolmogorov_pvalue(0.5, 100) < 1e-10);
}
