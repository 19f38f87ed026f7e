#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coupledpf/filters.hpp"
#include "coupledpf/harness.hpp"
#include "coupledpf/io.hpp"

using namespace coupledpf;
using harness::ExperimentConfig;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.horizon = 10;
  c.particles = 16;
  c.replicates = 6;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("config files and overrides") {
  std::istringstream in("model = hidden-ar\n[filter]\nN = 64\nscheme = sorted\n[run]\nR = 7\ntheta = 0.3\n");
  auto c = harness::load_config(in);
  CHECK(c.particles == 64);
  CHECK(c.scheme == "sorted");
  CHECK(c.replicates == 7);
  CHECK(c.theta == std::vector<double>{0.3});
  harness::apply_setting(c, "epsilon-frac", "0.1");
  CHECK(c.epsilon_frac == 0.1);
  CHECK_THROWS_AS(harness::apply_setting(c, "particle_count", "3"), InvalidArgument);
  CHECK_THROWS_AS(harness::apply_setting(c, "N", "-3"), InvalidArgument);

  c.scheme = "fancy";
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("scheme"), InvalidArgument);
}

TEST_CASE("hash ignores output placement but not content") {
  auto a = small_config();
  auto b = a;
  b.out = "/tmp/x.csv";
  b.workers = 4;
  CHECK(a.hash() == b.hash());
  b.seed = 6;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("single-point profile equals the bootstrap filter") {
  auto c = small_config();
  c.theta_grid = {0.4};
  const auto out = harness::run_profile(c);
  const auto rows = lines(out.csv);
  CHECK(rows[0] == io::provenance_line(c.hash(), c.seed));
  CHECK(rows[1] == "theta,replicate,loglik,loglik_independent,loglik_kalman");
  const auto model = harness::build_model(c);
  const auto y = harness::load_or_simulate(c, *model, Parameter{0.4});
  for (std::size_t r = 0; r < c.replicates; ++r) {
    const auto f = fields(rows[2 + r]);
    const double expect =
        bootstrap_pf(*model, Parameter{0.4}, y, c.particles, SeedKey{.seed = c.seed, .replicate = r}.with_sweep(0)).loglik;
    CHECK(std::stod(f[2]) == expect);
  }
  CHECK(harness::run_profile(c).csv == out.csv);
}

TEST_CASE("fd study schema and independent baseline") {
  auto c = small_config();
  c.replicates = 200;
  c.horizon = 20;
  c.schemes = {"independent", "index-coupled"};
  const auto out = harness::run_fd_study(c);
  const auto rows = lines(out.csv);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1] == "h,scheme,correlation,gain");
  const auto indep = fields(rows[2]);
  CHECK(indep.size() == 4);
  CHECK(indep[1] == "independent");
  // correlation of independent runs is within 3 standard errors of zero
  CHECK(std::abs(std::stod(indep[2])) < 3.0 / std::sqrt(200.0));
  CHECK(std::stod(fields(rows[3])[3]) > std::stod(indep[3]));
}

TEST_CASE("pmmh smoke run") {
  auto c = small_config();
  c.iterations = 10;
  const auto out = harness::run_pmmh(c);
  const auto rows = lines(out.csv);
  CHECK(rows.size() == 12);
  CHECK(rows[1] == "iteration,theta_1,loglik,accepted");
  CHECK(out.summary_json.find("acceptance_rate") != std::string::npos);
}

TEST_CASE("rg runs are reproducible, worker-independent and aggregate exactly") {
  auto c = small_config();
  c.theta = {0.95};
  const auto one = harness::run_rg(c);
  c.workers = 3;
  const auto three = harness::run_rg(c);
  CHECK(one.csv == three.csv);
  CHECK(one.aggregate_csv == three.aggregate_csv);
  CHECK(one.exit_code == 0);

  const auto rows = lines(one.csv);
  const auto agg = lines(one.aggregate_csv);
  REQUIRE(rows.size() == 2 + c.replicates);
  for (std::size_t comp = 0; comp <= c.horizon; ++comp) {
    double sum = 0.0;
    for (std::size_t r = 0; r < c.replicates; ++r) sum += std::stod(fields(rows[2 + r])[5 + comp]);
    const double mean = std::stod(fields(agg[2 + comp])[3]);
    CHECK(std::abs(mean - sum / static_cast<double>(c.replicates)) < 1e-12);
  }
}

TEST_CASE("capped replicates fail the run unless allowed") {
  auto c = small_config();
  c.theta = {0.95};
  c.scheme = "naive-systematic";
  c.max_iterations = 1;
  c.particles = 32;
  const auto failed = harness::run_rg(c);
  CHECK(failed.exit_code != 0);
  c.allow_incomplete = true;
  CHECK(harness::run_rg(c).exit_code == 0);
}

TEST_CASE("validate reports every oracle check") {
  const auto out = harness::run_validate(small_config());
  CHECK(out.exit_code == 0);
  for (const auto& l : lines(out.csv)) CHECK(l.rfind("PASS ", 0) == 0);
}
