#include <doctest.h>

#include <map>

#include "coupledpf/oracle.hpp"
#include "coupledpf/scheme.hpp"
#include "frequency.hpp"

using namespace coupledpf;

namespace {

std::vector<double> random_weights(std::size_t n, const SeedKey& key) {
  auto u = uniforms(key, n);
  double s = 0.0;
  for (auto& x : u) s += x;
  for (auto& x : u) x /= s;
  return u;
}

Matrix column(std::initializer_list<double> v) {
  Matrix x(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double e : v) x(i++, 0) = e;
  return x;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (auto k : {SchemeKind::independent, SchemeKind::index_coupled, SchemeKind::sorted, SchemeKind::transport,
                 SchemeKind::transport_symmetrized, SchemeKind::naive_systematic}) {
    CHECK(parse_scheme(scheme_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_scheme("optimal"), InvalidArgument);
}

TEST_CASE("sorted resampling follows the curve") {
  const Matrix x = column({10.0, -3.0});
  const std::vector<double> w{0.5, 0.5};
  const auto box = bounding_box(x);
  CHECK(sorted_resample(x, w, 1, 0.3, box, 16) == Ancestors{1});
  CHECK(sorted_resample(x, w, 1, 0.7, box, 16) == Ancestors{0});
}

TEST_CASE("identical systems resample identically") {
  const Matrix x = column({0.3, -1.0, 2.0, 0.7});
  const auto w = random_weights(4, SeedKey{.seed = 1});
  for (auto k : {SchemeKind::independent, SchemeKind::index_coupled, SchemeKind::sorted, SchemeKind::transport,
                 SchemeKind::transport_symmetrized, SchemeKind::naive_systematic}) {
    const auto p = coupled_resample(Scheme{.kind = k}, x, w, x, w, 50, SeedKey{.seed = 2});
    CHECK(p.a == p.a_tilde);
  }
  const Ancestors a{0, 3, 3, 1};
  CHECK(conditional_resample(Scheme{.kind = SchemeKind::transport}, x, w, a, x, w, SeedKey{}) == a);
}

TEST_CASE("matrix schemes put exact margins on every ancestor vector") {
  for (std::size_t n : {2u, 3u}) {
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
      const auto w = random_weights(n, SeedKey{.seed = rep, .particle = 1});
      const auto wt = random_weights(n, SeedKey{.seed = rep, .particle = 2});
      Matrix x(static_cast<Eigen::Index>(n), 1), xt(static_cast<Eigen::Index>(n), 1);
      const auto zx = unit_normals(SeedKey{.seed = rep, .particle = 3}, 2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        x(static_cast<Eigen::Index>(i), 0) = zx[i];
        xt(static_cast<Eigen::Index>(i), 0) = zx[n + i];
      }
      for (auto k : {SchemeKind::independent, SchemeKind::index_coupled, SchemeKind::transport,
                     SchemeKind::transport_symmetrized}) {
        const auto c = coupling_matrix(Scheme{.kind = k}, x, w, xt, wt);
        const auto outcomes = enumerate_coupling(c.p);
        std::map<Ancestors, double> first, second;
        for (const auto& o : outcomes) {
          first[o.a] += o.prob;
          second[o.a_tilde] += o.prob;
        }
        double err = 0.0;
        for (const auto& [a, pr] : first) {
          double expect = 1.0;
          for (auto i : a) expect *= w[i];
          err = std::max(err, std::abs(pr - expect));
        }
        for (const auto& [a, pr] : second) {
          double expect = 1.0;
          for (auto i : a) expect *= wt[i];
          err = std::max(err, std::abs(pr - expect));
        }
        CHECK(err < 1e-12);
      }
    }
  }
}

TEST_CASE("sampling schemes have the right empirical margins") {
  const std::vector<double> w{0.15, 0.5, 0.35}, wt{0.6, 0.1, 0.3};
  const Matrix x = column({0.2, -1.0, 1.5});
  const Matrix xt = column({0.4, 1.0, -0.5});
  const std::size_t draws = 100000;
  for (auto k : {SchemeKind::sorted, SchemeKind::naive_systematic, SchemeKind::index_coupled,
                 SchemeKind::transport}) {
    std::vector<std::size_t> ca(3, 0), cb(3, 0);
    for (std::size_t i = 0; i < draws; ++i) {
      const auto p = coupled_resample(Scheme{.kind = k}, x, w, xt, wt, 3,
                                      SeedKey{.seed = 5, .sweep = i, .role = Role::resample});
      ++ca[p.a[0]];
      ++cb[p.a_tilde[2]];
    }
    CHECK(frequencies_match(ca, w, draws));
    CHECK(frequencies_match(cb, wt, draws));
  }
}

TEST_CASE("conditional draws reproduce the coupling rows") {
  const std::vector<double> w{0.7, 0.3}, wt{0.4, 0.6};
  const Matrix x = column({0.0, 1.0});
  const Matrix xt = column({0.1, 2.0});
  const std::size_t n = 100000;
  const Ancestors a(n, 0);
  const auto at = conditional_resample(Scheme{.kind = SchemeKind::index_coupled}, x, w, a, xt, wt, SeedKey{.seed = 6});
  std::vector<std::size_t> c(2, 0);
  for (auto i : at) ++c[i];
  CHECK(frequencies_match(c, {0.4 / 0.7, 0.3 / 0.7}, n));
  CHECK_THROWS_AS(conditional_resample(Scheme{.kind = SchemeKind::sorted}, x, w, a, xt, wt, SeedKey{}),
                  UnsupportedOperation);
}
