#include <doctest.h>

#include "coupledpf/hilbert.hpp"
#include "coupledpf/rng.hpp"

using namespace coupledpf;

TEST_CASE("first-order curve in two dimensions") {
  const BoundingBox box{{0.0, 0.0}, {1.0, 1.0}};
  const std::vector<std::vector<double>> cells{{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.75}, {0.75, 0.25}};
  for (std::uint64_t i = 0; i < 4; ++i) CHECK(hilbert_key(cells[i], box, 1) == i);
}

TEST_CASE("second-order keys form a continuous path") {
  // consecutive keys must land in edge-adjacent cells
  const BoundingBox box{{0.0, 0.0}, {4.0, 4.0}};
  std::vector<std::pair<int, int>> by_key(16, {-1, -1});
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const std::vector<double> p{i + 0.5, j + 0.5};
      const auto k = hilbert_key(p, box, 2);
      REQUIRE(k < 16);
      by_key[k] = {i, j};
    }
  }
  for (std::size_t k = 1; k < 16; ++k) {
    const int step = std::abs(by_key[k].first - by_key[k - 1].first) +
                     std::abs(by_key[k].second - by_key[k - 1].second);
    CHECK(step == 1);
  }
}

TEST_CASE("one dimension is monotone") {
  const BoundingBox box{{-10.0}, {10.0}};
  const auto order = default_hilbert_order(1);
  CHECK(order == 16);
  const auto u = uniforms(SeedKey{.seed = 5}, 400);
  for (std::size_t i = 0; i + 1 < u.size(); i += 2) {
    const double a = -10.0 + 20.0 * u[i], b = -10.0 + 20.0 * u[i + 1];
    const auto ka = hilbert_key(std::vector<double>{a}, box, order);
    const auto kb = hilbert_key(std::vector<double>{b}, box, order);
    if (a < b) CHECK(ka <= kb);
    if (b < a) CHECK(kb <= ka);
  }
}

TEST_CASE("orders, clamping and ties") {
  CHECK(default_hilbert_order(2) == 16);
  CHECK(default_hilbert_order(5) == 12);
  const BoundingBox box{{0.0, 0.0}, {1.0, 1.0}};
  const std::vector<double> p{0.3, 0.9};
  CHECK(hilbert_key(p, box, 8) == hilbert_key(p, box, 8));
  CHECK(hilbert_key(std::vector<double>{-5.0, -5.0}, box, 4) == hilbert_key(std::vector<double>{0.0, 0.0}, box, 4));

  Matrix pts(4, 1);
  pts << 10.0, -3.0, 2.0, -3.0;
  const auto sorted = hilbert_sort(pts, bounding_box(pts), 16);
  CHECK(sorted == std::vector<std::size_t>{1, 3, 2, 0});

  Matrix same(3, 2);
  same.setConstant(1.5);
  const auto bb = bounding_box(same);
  CHECK(hilbert_sort(same, bb, 8) == std::vector<std::size_t>{0, 1, 2});
}
