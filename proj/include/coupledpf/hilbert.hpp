#pragma once

#include <cstdint>
#include <vector>

#include "coupledpf/types.hpp"

namespace coupledpf {

/// Axis-aligned box enclosing a particle cloud.
struct BoundingBox {
  std::vector<double> lower;
  std::vector<double> upper;

  [[nodiscard]] std::size_t dim() const { return lower.size(); }
};

BoundingBox bounding_box(const Matrix& points);
/// Smallest box containing both.
BoundingBox merge(const BoundingBox& a, const BoundingBox& b);

/// 16 bits per dimension, reduced so that order * dim <= 62.
unsigned default_hilbert_order(std::size_t dim);

/// Position of `point` along the Hilbert curve of the given order over `box`.
/// Points outside are clamped; a zero-width side is widened to 1 around its value.
std::uint64_t hilbert_key(ConstSpan point, const BoundingBox& box, unsigned order);

/// Row indices of `points` sorted by Hilbert key, ties by index.
std::vector<std::size_t> hilbert_sort(const Matrix& points, const BoundingBox& box, unsigned order);

}  // namespace coupledpf
