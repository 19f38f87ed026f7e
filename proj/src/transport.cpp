#include "coupledpf/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coupledpf {

Matrix distance_matrix(const Matrix& x, const Matrix& x_tilde) {
  detail::require_dims(x.cols() == x_tilde.cols(), "distance_matrix: dimensions differ");
  Matrix d(x.rows(), x_tilde.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x_tilde.rows(); ++j) {
      d(i, j) = (x.row(i) - x_tilde.row(j)).norm();
    }
  }
  return d;
}

double default_epsilon(const Matrix& d, double frac) {
  detail::require(frac > 0.0, "epsilon fraction must be positive");
  std::vector<double> v(d.data(), d.data() + d.size());
  if (v.empty()) return frac;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double med = *mid;
  if (v.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(v.begin(), mid));
  }
  if (med > 0.0) return frac * med;
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : v) {
    if (x > 0.0) {
      sum += x;
      ++count;
    }
  }
  return frac * (count > 0 ? sum / static_cast<double>(count) : 1.0);
}

namespace {

double ratio(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

}  // namespace

double correction_bound(const Matrix& p, ConstSpan w, ConstSpan w_tilde) {
  const Vector rows = p.rowwise().sum();
  const Vector cols = p.colwise().sum().transpose();
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    alpha = std::min(alpha, ratio(w[static_cast<std::size_t>(i)], rows(i)));
    alpha = std::min(alpha, ratio(w_tilde[static_cast<std::size_t>(i)], cols(i)));
  }
  return alpha;
}

SinkhornResult sinkhorn(const Matrix& d, ConstSpan w, ConstSpan w_tilde, double epsilon,
                        double alpha_target, int max_iter) {
  const auto n = d.rows();
  const auto m = d.cols();
  detail::require_dims(static_cast<std::size_t>(n) == w.size() &&
                           static_cast<std::size_t>(m) == w_tilde.size(),
                       "sinkhorn: distance matrix and weights disagree");
  detail::require(epsilon > 0.0 && std::isfinite(epsilon), "sinkhorn: epsilon must be positive");
  detail::require(alpha_target < 1.0, "sinkhorn: alpha target must be < 1");
  detail::require(max_iter >= 1, "sinkhorn: need at least one iteration");

  // Per-row shift of D / epsilon; it rescales u only and keeps K from underflowing.
  Matrix k(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shift = d.row(i).minCoeff() / epsilon;
    for (Eigen::Index j = 0; j < m; ++j) k(i, j) = std::exp(-(d(i, j) / epsilon - shift));
  }

  Vector u = Vector::Ones(n);
  Vector v = Vector::Ones(m);
  SinkhornResult out;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector kv = k * v;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double wi = w[static_cast<std::size_t>(i)];
      u(i) = wi > 0.0 ? wi / kv(i) : 0.0;
    }
    const Vector ktu = k.transpose() * u;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double wj = w_tilde[static_cast<std::size_t>(j)];
      if (wj <= 0.0) {
        v(j) = 0.0;
      } else if (ktu(j) > 0.0) {
        v(j) = wj / ktu(j);
      } else {
        throw NumericalError("sinkhorn: kernel underflow on a column with mass; increase epsilon");
      }
    }
    out.plan = u.asDiagonal() * k * v.asDiagonal();
    if (!out.plan.allFinite()) {
      throw NumericalError("sinkhorn: non-finite scaling; increase epsilon");
    }
    out.iterations = it;
    out.alpha = correction_bound(out.plan, w, w_tilde);
    if (out.alpha >= alpha_target) break;
  }
  return out;
}

CouplingMatrix marginal_correction(const Matrix& p_hat, ConstSpan w, ConstSpan w_tilde) {
  detail::require_dims(static_cast<std::size_t>(p_hat.rows()) == w.size() &&
                           static_cast<std::size_t>(p_hat.cols()) == w_tilde.size(),
                       "marginal_correction: plan and weights disagree");
  detail::require((p_hat.array() >= 0.0).all(), "marginal_correction: plan has negative entries");
  const double total = p_hat.sum();
  detail::require(total > 0.0, "marginal_correction: plan has zero mass");

  CouplingMatrix out;
  out.row_marginal.assign(w.begin(), w.end());
  out.col_marginal.assign(w_tilde.begin(), w_tilde.end());
  const Matrix p = p_hat / total;
  const double alpha = correction_bound(p, w, w_tilde);
  if (alpha >= 1.0) {
    out.p = p;
    return out;
  }
  const Vector rows = p.rowwise().sum();
  const Vector cols = p.colwise().sum().transpose();
  Vector r(rows.size()), rt(cols.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r(i) = std::max(w[static_cast<std::size_t>(i)] - alpha * rows(i), 0.0);
  }
  for (Eigen::Index j = 0; j < rt.size(); ++j) {
    rt(j) = std::max(w_tilde[static_cast<std::size_t>(j)] - alpha * cols(j), 0.0);
  }
  const double sr = r.sum();
  const double srt = rt.sum();
  if (sr <= 0.0 || srt <= 0.0) {
    out.p = p;
    return out;
  }
  out.p = alpha * p + (1.0 - alpha) * (r / sr) * (rt / srt).transpose();
  return out;
}

CouplingMatrix transport_coupling(ConstSpan w, const Matrix& x, ConstSpan w_tilde,
                                  const Matrix& x_tilde, const TransportOptions& options) {
  const Matrix d = distance_matrix(x, x_tilde);
  const double eps = default_epsilon(d, options.epsilon_frac);
  const auto plan = sinkhorn(d, w, w_tilde, eps, options.alpha_target, options.max_iter);
  return marginal_correction(plan.plan, w, w_tilde);
}

CouplingMatrix symmetrized_transport(ConstSpan w, const Matrix& x, ConstSpan w_tilde,
                                     const Matrix& x_tilde, const TransportOptions& options) {
  auto forward = transport_coupling(w, x, w_tilde, x_tilde, options);
  const auto backward = transport_coupling(w_tilde, x_tilde, w, x, options);
  forward.p = 0.5 * (forward.p + backward.p.transpose());
  return forward;
}

}  // namespace coupledpf
