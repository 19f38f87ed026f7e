#include <doctest.h>

#include <cmath>

#include "coupledpf/rng.hpp"
#include "coupledpf/transport.hpp"

using namespace coupledpf;

namespace {

std::vector<double> random_weights(std::size_t n, const SeedKey& key) {
  auto u = uniforms(key, n);
  double s = 0.0;
  for (auto& x : u) {
    x += 0.01;
    s += x;
  }
  for (auto& x : u) x /= s;
  return u;
}

Matrix random_cloud(std::size_t n, std::size_t d, const SeedKey& key) {
  const auto z = unit_normals(key, n * d);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n * d; ++i) x.data()[i] = z[i];
  return x;
}

double marginal_error(const CouplingMatrix& c, const std::vector<double>& w, const std::vector<double>& wt) {
  const Vector rows = c.p.rowwise().sum();
  const Vector cols = c.p.colwise().sum().transpose();
  double err = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    err = std::max(err, std::abs(rows(static_cast<Eigen::Index>(i)) - w[i]));
    err = std::max(err, std::abs(cols(static_cast<Eigen::Index>(i)) - wt[i]));
  }
  return err;
}

}  // namespace

TEST_CASE("distance matrix") {
  Matrix x(2, 1), xt(1, 1);
  x << 0.0, 1.0;
  xt << 2.0;
  const Matrix d = distance_matrix(x, xt);
  CHECK(d.rows() == 2);
  CHECK(d.cols() == 1);
  CHECK(d(0, 0) == 2.0);
  CHECK(d(1, 0) == 1.0);

  const auto a = random_cloud(5, 3, SeedKey{.seed = 1});
  const auto b = random_cloud(5, 3, SeedKey{.seed = 2});
  CHECK(distance_matrix(a, a).diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK((distance_matrix(a, b) - distance_matrix(b, a).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("default epsilon") {
  Matrix d(2, 2);
  d << 0, 1, 3, 0;
  CHECK(default_epsilon(d, 0.1) == doctest::Approx(0.05));
  Matrix zeros = Matrix::Zero(3, 3);
  zeros(0, 1) = 2.0;
  CHECK(default_epsilon(zeros, 0.5) == doctest::Approx(1.0));
  CHECK(default_epsilon(Matrix::Zero(2, 2), 0.5) == doctest::Approx(0.5));
}

TEST_CASE("sinkhorn fixed points") {
  Matrix one(1, 1);
  one << 0.0;
  const auto single = sinkhorn(one, std::vector<double>{1.0}, std::vector<double>{1.0}, 1.0, 0.9, 10);
  CHECK(single.plan(0, 0) == doctest::Approx(1.0));
  CHECK(single.alpha == doctest::Approx(1.0));

  Matrix d(2, 2);
  d << 0, 1, 1, 0;
  const std::vector<double> half{0.5, 0.5};
  const auto res = sinkhorn(d, half, half, 1.0, 0.95, 100);
  const double off = std::exp(-1.0), scale = 2.0 * (1.0 + off);
  CHECK(std::abs(res.plan(0, 0) - 1.0 / scale) < 1e-10);
  CHECK(std::abs(res.plan(0, 1) - off / scale) < 1e-10);
  CHECK(res.iterations == 1);

  // huge epsilon: the kernel is flat and the plan is the product coupling
  const auto w = random_weights(6, SeedKey{.seed = 3});
  const auto wt = random_weights(6, SeedKey{.seed = 4});
  const Matrix dd = distance_matrix(random_cloud(6, 2, SeedKey{.seed = 5}), random_cloud(6, 2, SeedKey{.seed = 6}));
  const auto flat = sinkhorn(dd, w, wt, 1e6 * dd.maxCoeff(), 0.999999, 1000);
  double err = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) err = std::max(err, std::abs(flat.plan(i, j) - w[static_cast<std::size_t>(i)] * wt[static_cast<std::size_t>(j)]));
  }
  CHECK(err < 1e-6);
}

TEST_CASE("sinkhorn rejects a kernel that underflows on a loaded column") {
  Matrix far(2, 2);
  far << 0.0, 5000.0, 0.0, 5000.0;
  CHECK_THROWS_AS(sinkhorn(far, std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}, 1.0, 0.9, 10),
                  NumericalError);
}

TEST_CASE("marginal correction") {
  const std::vector<double> w{0.6, 0.4}, wt{0.5, 0.5};
  Matrix p_hat(2, 2);
  p_hat << 0.5, 0.0, 0.0, 0.5;
  CHECK(correction_bound(p_hat, w, wt) == doctest::Approx(0.8));
  const auto c = marginal_correction(p_hat, w, wt);
  // alpha = 0.8, residuals r = (0.2, 0) and r~ = (0.1, 0.1) before normalization
  Matrix expect(2, 2);
  expect << 0.5, 0.1, 0.0, 0.4;
  CHECK((c.p - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(marginal_error(c, w, wt) < 1e-12);

  Matrix inside(2, 2);
  inside << 0.3, 0.3, 0.2, 0.2;
  const auto kept = marginal_correction(inside, w, wt);
  CHECK((kept.p - inside).cwiseAbs().maxCoeff() < 1e-15);

  Matrix diag(2, 2);
  diag << 0.6, 0.0, 0.0, 0.4;
  const auto dg = marginal_correction(diag, w, w);
  CHECK(dg.p(0, 1) == 0.0);
  CHECK(dg.p(1, 0) == 0.0);
}

TEST_CASE("transport couplings have exact margins") {
  for (std::size_t n : {2u, 8u, 32u, 64u}) {
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      const auto w = random_weights(n, SeedKey{.seed = 10 + rep, .particle = static_cast<std::uint32_t>(n)});
      const auto wt = random_weights(n, SeedKey{.seed = 20 + rep, .particle = static_cast<std::uint32_t>(n)});
      const auto x = random_cloud(n, 2, SeedKey{.seed = 30 + rep});
      const auto xt = random_cloud(n, 2, SeedKey{.seed = 40 + rep});
      CHECK(marginal_error(transport_coupling(w, x, wt, xt), w, wt) < 1e-9);
      CHECK(marginal_error(symmetrized_transport(w, x, wt, xt), w, wt) < 1e-9);
    }
  }
}

TEST_CASE("symmetrized transport") {
  const auto w = random_weights(8, SeedKey{.seed = 50});
  const auto wt = random_weights(8, SeedKey{.seed = 51});
  const auto x = random_cloud(8, 1, SeedKey{.seed = 52});
  const auto xt = random_cloud(8, 1, SeedKey{.seed = 53});
  const auto same = symmetrized_transport(w, x, w, x);
  CHECK((same.p - same.p.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  const auto fwd = symmetrized_transport(w, x, wt, xt);
  const auto bwd = symmetrized_transport(wt, xt, w, x);
  CHECK((fwd.p - bwd.p.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}
