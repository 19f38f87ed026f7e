#include <doctest.h>

#include "coupledpf/resampling.hpp"
#include "frequency.hpp"

using namespace coupledpf;

namespace {

std::vector<std::size_t> tally(const Ancestors& a, std::size_t n) {
  std::vector<std::size_t> c(n, 0);
  for (auto i : a) ++c[i];
  return c;
}

Matrix dense_of(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[0].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace

TEST_CASE("weight validation") {
  CHECK_NOTHROW(check_weights(std::vector<double>{0.25, 0.75}));
  CHECK_THROWS_AS(check_weights(std::vector<double>{0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(check_weights(std::vector<double>{-0.1, 1.1}), InvalidArgument);
}

TEST_CASE("alias table and inverse cdf reproduce the weights") {
  const std::vector<double> w{0.1, 0.0, 0.6, 0.3};
  const AliasTable table(w);
  const std::size_t n = 100000;
  const auto u = uniforms(SeedKey{.seed = 1}, n);
  std::vector<std::size_t> ca(4, 0), ci(4, 0);
  for (double x : u) {
    ++ca[table.sample(x)];
    ++ci[inverse_cdf(w, x)];
  }
  CHECK(ca[1] == 0);
  CHECK(ci[1] == 0);
  CHECK(frequencies_match(ca, w, n));
  CHECK(frequencies_match(ci, w, n));
  CHECK(inverse_cdf(std::vector<double>{0.0, 1.0}, 0.0) == 1);
}

TEST_CASE("multinomial and systematic") {
  const std::vector<double> w{0.2, 0.5, 0.3};
  const std::size_t n = 100000;
  CHECK(frequencies_match(tally(multinomial(w, n, SeedKey{.seed = 2}), 3), w, n));
  CHECK(multinomial(w, 0, SeedKey{}).empty());
  // systematic with u = 0.5 over 10 draws: exact counts 2, 5, 3
  CHECK(tally(systematic(w, 10, 0.5), 3) == std::vector<std::size_t>{2, 5, 3});
  // reversed order visits the last index first
  const auto rev = systematic(w, 10, 0.05, {2, 1, 0});
  CHECK(rev.front() == 2);
  CHECK(tally(rev, 3) == std::vector<std::size_t>{2, 5, 3});
}

TEST_CASE("independent coupling") {
  const std::vector<double> one{1.0, 0.0}, two{0.0, 1.0};
  const auto p = independent_coupling_sample(one, two, 2, SeedKey{});
  CHECK(p.a == Ancestors{0, 0});
  CHECK(p.a_tilde == Ancestors{1, 1});

  const std::vector<double> half{0.5, 0.5};
  const std::size_t n = 100000;
  const auto q = independent_coupling_sample(half, half, n, SeedKey{.seed = 3});
  std::size_t same = 0;
  for (std::size_t k = 0; k < n; ++k) same += q.a[k] == q.a_tilde[k];
  CHECK(frequencies_match({same}, {0.5}, n));
}

TEST_CASE("index-coupled closed form") {
  const std::vector<double> w{0.7, 0.3}, wt{0.4, 0.6};
  const auto c = index_coupled_build(w, wt);
  CHECK(c.alpha == doctest::Approx(0.7));
  const Matrix p = c.dense();
  const Matrix expect = dense_of({{0.4, 0.3}, {0.0, 0.3}});
  CHECK((p - expect).cwiseAbs().maxCoeff() < 1e-12);

  const auto same = index_coupled_build(w, w);
  CHECK(same.alpha == 1.0);
  const Matrix d = same.dense();
  CHECK(d(0, 1) == 0.0);
  CHECK(d(0, 0) == doctest::Approx(0.7));

  const auto disjoint = index_coupled_build(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0});
  CHECK(disjoint.alpha == 0.0);
  CHECK(disjoint.dense()(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("index-coupled sampling") {
  const std::vector<double> w{0.7, 0.3}, wt{0.4, 0.6};
  const auto c = index_coupled_build(w, wt);
  const std::size_t n = 100000;
  const auto pairs = index_coupled_sample(c, n, SeedKey{.seed = 4});
  std::size_t same = 0;
  std::vector<std::size_t> joint(4, 0);
  for (std::size_t k = 0; k < n; ++k) {
    same += pairs.a[k] == pairs.a_tilde[k];
    ++joint[pairs.a[k] * 2 + pairs.a_tilde[k]];
  }
  CHECK(frequencies_match({same}, {0.7}, n));
  CHECK(frequencies_match(tally(pairs.a, 2), w, n));
  CHECK(frequencies_match(tally(pairs.a_tilde, 2), wt, n));
  CHECK(frequencies_match(joint, {0.4, 0.3, 0.0, 0.3}, n));

  const auto diag = index_coupled_sample(index_coupled_build(w, w), 1000, SeedKey{.seed = 5});
  CHECK(diag.a == diag.a_tilde);
}

TEST_CASE("index-coupled conditional draws follow the rows") {
  const std::vector<double> w{0.7, 0.3}, wt{0.4, 0.6};
  const auto c = index_coupled_build(w, wt);
  const std::size_t n = 100000;
  const Ancestors zeros(n, 0);
  const auto at = index_coupled_conditional(c, w, zeros, SeedKey{.seed = 6});
  CHECK(frequencies_match(tally(at, 2), {0.4 / 0.7, 0.3 / 0.7}, n));
  const Ancestors ones(n, 1);
  CHECK(tally(index_coupled_conditional(c, w, ones, SeedKey{.seed = 7}), 2)[0] == 0);

  const auto same = index_coupled_build(w, w);
  const Ancestors a{0, 1, 1, 0};
  CHECK(index_coupled_conditional(same, w, a, SeedKey{}) == a);
}

TEST_CASE("dense pairs and conditional draws") {
  const Matrix diag = dense_of({{0.3, 0.0}, {0.0, 0.7}});
  const auto d = sample_pairs(diag, 500, SeedKey{.seed = 8});
  CHECK(d.a == d.a_tilde);
  CHECK(sample_pairs(diag, 0, SeedKey{}).a.empty());

  const Matrix p = dense_of({{0.1, 0.2}, {0.3, 0.4}});
  const std::size_t n = 100000;
  const auto s = sample_pairs(p, n, SeedKey{.seed = 9});
  std::vector<std::size_t> joint(4, 0);
  for (std::size_t k = 0; k < n; ++k) ++joint[s.a[k] * 2 + s.a_tilde[k]];
  CHECK(frequencies_match(joint, {0.1, 0.2, 0.3, 0.4}, n));

  // independent coupling: the conditional law ignores a
  const Matrix indep = dense_of({{0.5 * 0.25, 0.5 * 0.75}, {0.5 * 0.25, 0.5 * 0.75}});
  const Ancestors a(n, 0);
  CHECK(frequencies_match(tally(conditional_sample(indep, a, SeedKey{.seed = 10}), 2), {0.25, 0.75}, n));
  const Matrix empty_row = dense_of({{0.5, 0.5}, {0.0, 0.0}});
  CHECK_THROWS_AS(conditional_sample(empty_row, Ancestors{1}, SeedKey{}), InvalidArgument);
}
