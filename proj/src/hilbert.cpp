#include "coupledpf/hilbert.hpp"

#include <algorithm>
#include <numeric>

namespace coupledpf {

BoundingBox bounding_box(const Matrix& points) {
  detail::require(points.rows() >= 1, "bounding_box: empty point set");
  BoundingBox box;
  const auto d = points.cols();
  box.lower.resize(static_cast<std::size_t>(d));
  box.upper.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    box.lower[static_cast<std::size_t>(j)] = points.col(j).minCoeff();
    box.upper[static_cast<std::size_t>(j)] = points.col(j).maxCoeff();
  }
  return box;
}

BoundingBox merge(const BoundingBox& a, const BoundingBox& b) {
  detail::require_dims(a.dim() == b.dim(), "merge: bounding boxes differ in dimension");
  BoundingBox out = a;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    out.lower[j] = std::min(a.lower[j], b.lower[j]);
    out.upper[j] = std::max(a.upper[j], b.upper[j]);
  }
  return out;
}

unsigned default_hilbert_order(std::size_t dim) {
  detail::require(dim >= 1 && dim <= 62, "hilbert order: dimension must be in 1..62");
  return std::min<unsigned>(16, static_cast<unsigned>(62 / dim));
}

namespace {

// Skilling's transform from axes to the transposed Hilbert index, in place.
void axes_to_transpose(std::vector<std::uint64_t>& x, unsigned bits) {
  const std::size_t n = x.size();
  const std::uint64_t top = std::uint64_t{1} << (bits - 1);
  for (std::uint64_t q = top; q > 1; q >>= 1) {
    const std::uint64_t p = q - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint64_t t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) x[i] ^= x[i - 1];
  std::uint64_t t = 0;
  for (std::uint64_t q = top; q > 1; q >>= 1) {
    if (x[n - 1] & q) t ^= q - 1;
  }
  for (auto& v : x) v ^= t;
}

}  // namespace

std::uint64_t hilbert_key(ConstSpan point, const BoundingBox& box, unsigned order) {
  const std::size_t d = point.size();
  detail::require_dims(d == box.dim(), "hilbert_key: point and box differ in dimension");
  detail::require(order >= 1 && order * d <= 62, "hilbert_key: need 1 <= order and order * dim <= 62");

  const std::uint64_t cells = std::uint64_t{1} << order;
  std::vector<std::uint64_t> coords(d);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = box.lower[j];
    double width = box.upper[j] - lo;
    if (!(width > 0.0)) {
      lo = point[j] - 0.5;
      width = 1.0;
    }
    const double s = std::clamp((point[j] - lo) / width, 0.0, 1.0);
    const auto c = static_cast<std::uint64_t>(s * static_cast<double>(cells));
    coords[j] = std::min(c, cells - 1);
  }
  if (d == 1) return coords[0];

  axes_to_transpose(coords, order);
  std::uint64_t key = 0;
  for (int b = static_cast<int>(order) - 1; b >= 0; --b) {
    for (std::size_t j = 0; j < d; ++j) key = (key << 1) | ((coords[j] >> b) & 1U);
  }
  return key;
}

std::vector<std::size_t> hilbert_sort(const Matrix& points, const BoundingBox& box, unsigned order) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = hilbert_key(row_span(points, static_cast<Eigen::Index>(i)), box, order);
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return idx;
}

}  // namespace coupledpf
