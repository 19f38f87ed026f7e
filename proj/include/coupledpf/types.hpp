#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "coupledpf/errors.hpp"

namespace coupledpf {

/// Row-major so that each particle (row) is contiguous in memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using ConstSpan = std::span<const double>;
using MutSpan = std::span<double>;

inline ConstSpan row_span(const Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline MutSpan row_span(Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Model parameter vector (model units). Entries must be finite.
class Parameter {
 public:
  Parameter() = default;
  explicit Parameter(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      detail::require(std::isfinite(v), "parameter entries must be finite");
    }
  }
  Parameter(std::initializer_list<double> values) : Parameter(std::vector<double>(values)) {}

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  /// Copy with component `i` shifted by `delta`.
  [[nodiscard]] Parameter shifted(std::size_t i, double delta) const {
    auto v = values_;
    v.at(i) += delta;
    return Parameter(std::move(v));
  }

  friend bool operator==(const Parameter&, const Parameter&) = default;

 private:
  std::vector<double> values_;
};

/// T x d_y matrix of observations; row t-1 holds y_t.
class Observations {
 public:
  Observations() = default;
  explicit Observations(Matrix y) : y_(std::move(y)) {
    detail::require(y_.rows() >= 1, "observation series needs at least one time step");
  }

  [[nodiscard]] std::size_t horizon() const { return static_cast<std::size_t>(y_.rows()); }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(y_.cols()); }
  /// Observation at time t, 1 <= t <= T.
  [[nodiscard]] ConstSpan at(std::size_t t) const {
    return row_span(y_, static_cast<Eigen::Index>(t - 1));
  }
  [[nodiscard]] const Matrix& matrix() const { return y_; }

 private:
  Matrix y_;
};

/// A (T+1) x d_x state path x_{0:T}.
struct Trajectory {
  Matrix path;

  [[nodiscard]] std::size_t horizon() const {
    return path.rows() == 0 ? 0 : static_cast<std::size_t>(path.rows() - 1);
  }
  /// Bitwise equality; coupled chains that have met produce identical paths.
  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.path.rows() == b.path.rows() && a.path.cols() == b.path.cols() &&
           (a.path.array() == b.path.array()).all();
  }
};

}  // namespace coupledpf
