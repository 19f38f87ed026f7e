#include "coupledpf/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coupledpf {

void check_weights(ConstSpan w) {
  detail::require(!w.empty(), "weights: empty vector");
  double total = 0.0;
  for (double v : w) {
    detail::require(std::isfinite(v) && v >= 0.0, "weights: entries must be finite and non-negative");
    total += v;
  }
  detail::require(std::abs(total - 1.0) <= 1e-10, "weights: entries must sum to 1");
}

AliasTable::AliasTable(ConstSpan w) : prob_(w.size()), alias_(w.size()) {
  const std::size_t n = w.size();
  detail::require(n >= 1, "alias table: empty weights");
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  detail::require(total > 0.0, "alias table: weights have zero total");
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = w[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(i);
    alias_[i] = i;
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t i : large) prob_[i] = 1.0;
  // Leftovers from rounding: only an entry with positive weight may keep itself.
  for (std::size_t i : small) prob_[i] = w[i] > 0.0 ? 1.0 : 0.0;
}

std::size_t AliasTable::sample(double u) const {
  const double scaled = u * static_cast<double>(prob_.size());
  const auto k = std::min(static_cast<std::size_t>(scaled), prob_.size() - 1);
  return (scaled - static_cast<double>(k)) < prob_[k] ? k : alias_[k];
}

std::size_t inverse_cdf(ConstSpan w, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    acc += w[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

Ancestors multinomial(ConstSpan w, std::size_t n, const SeedKey& key) {
  const AliasTable table(w);
  Stream s(key);
  Ancestors a(n);
  for (auto& v : a) v = table.sample(s.uniform());
  return a;
}

Ancestors systematic(ConstSpan w, std::size_t n, double u, const std::vector<std::size_t>& order) {
  detail::require_dims(order.size() == w.size(), "systematic: order must be a permutation of the weights");
  Ancestors a(n);
  if (n == 0) return a;
  std::size_t last_positive = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (w[order[p]] > 0.0) last_positive = p;
  }
  std::size_t pos = 0;
  double acc = w[order[0]];
  for (std::size_t k = 0; k < n; ++k) {
    const double target = (static_cast<double>(k) + u) / static_cast<double>(n);
    while (target >= acc && pos + 1 < order.size()) acc += w[order[++pos]];
    a[k] = w[order[pos]] > 0.0 ? order[pos] : order[last_positive];
  }
  return a;
}

Ancestors systematic(ConstSpan w, std::size_t n, double u) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return systematic(w, n, u, order);
}

AncestorPairs independent_coupling_sample(ConstSpan w, ConstSpan w_tilde, std::size_t n,
                                          const SeedKey& key) {
  detail::require_dims(w.size() == w_tilde.size(), "independent coupling: weight sizes differ");
  const AliasTable t1(w), t2(w_tilde);
  Stream s(key);
  AncestorPairs out{Ancestors(n), Ancestors(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.a[k] = t1.sample(s.uniform());
    out.a_tilde[k] = t2.sample(s.uniform());
  }
  return out;
}

Matrix StructuredCoupling::dense() const {
  const auto n = static_cast<Eigen::Index>(mu.size());
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, i) = alpha * mu[static_cast<std::size_t>(i)];
  if (alpha < 1.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        p(i, j) += (1.0 - alpha) * r[static_cast<std::size_t>(i)] * r_tilde[static_cast<std::size_t>(j)];
      }
    }
  }
  return p;
}

StructuredCoupling index_coupled_build(ConstSpan w, ConstSpan w_tilde) {
  detail::require_dims(w.size() == w_tilde.size(), "index coupling: weight sizes differ");
  const std::size_t n = w.size();
  StructuredCoupling c;
  c.mu.resize(n);
  double alpha = 0.0;
  bool equal = true;
  for (std::size_t i = 0; i < n; ++i) {
    c.mu[i] = std::min(w[i], w_tilde[i]);
    alpha += c.mu[i];
    equal = equal && w[i] == w_tilde[i];
  }
  if (equal) {
    c.alpha = 1.0;
    c.mu.assign(w.begin(), w.end());
    return c;
  }
  c.alpha = std::min(alpha, 1.0);
  if (alpha > 0.0) {
    for (auto& v : c.mu) v /= alpha;
  }
  c.r.resize(n);
  c.r_tilde.resize(n);
  double sr = 0.0, srt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c.r[i] = std::max(w[i] - std::min(w[i], w_tilde[i]), 0.0);
    c.r_tilde[i] = std::max(w_tilde[i] - std::min(w[i], w_tilde[i]), 0.0);
    sr += c.r[i];
    srt += c.r_tilde[i];
  }
  if (sr <= 0.0 || srt <= 0.0) {
    // Residual mass lost to rounding: the weights agree up to floating error.
    c.alpha = 1.0;
    c.r.clear();
    c.r_tilde.clear();
    return c;
  }
  for (auto& v : c.r) v /= sr;
  for (auto& v : c.r_tilde) v /= srt;
  return c;
}

AncestorPairs index_coupled_sample(const StructuredCoupling& c, std::size_t n, const SeedKey& key) {
  Stream s(key);
  AncestorPairs out{Ancestors(n), Ancestors(n)};
  if (c.alpha <= 0.0) {
    const AliasTable left(c.r), right(c.r_tilde);
    for (std::size_t k = 0; k < n; ++k) {
      out.a[k] = left.sample(s.uniform());
      out.a_tilde[k] = right.sample(s.uniform());
    }
    return out;
  }
  const AliasTable common(c.mu);
  if (c.alpha >= 1.0) {
    for (std::size_t k = 0; k < n; ++k) out.a[k] = out.a_tilde[k] = common.sample(s.uniform());
    return out;
  }
  const AliasTable left(c.r), right(c.r_tilde);
  for (std::size_t k = 0; k < n; ++k) {
    if (s.uniform() < c.alpha) {
      out.a[k] = out.a_tilde[k] = common.sample(s.uniform());
    } else {
      out.a[k] = left.sample(s.uniform());
      out.a_tilde[k] = right.sample(s.uniform());
    }
  }
  return out;
}

Ancestors index_coupled_conditional(const StructuredCoupling& c, ConstSpan w, const Ancestors& a,
                                    const SeedKey& key) {
  detail::require_dims(w.size() == c.size(), "index coupling: weight size mismatch");
  Ancestors out(a.size());
  if (c.alpha >= 1.0) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      detail::require(a[k] < w.size() && w[a[k]] > 0.0, "conditional sample: ancestor has zero weight");
      out[k] = a[k];
    }
    return out;
  }
  const AliasTable right(c.r_tilde);
  Stream s(key);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::size_t i = a[k];
    detail::require(i < w.size() && w[i] > 0.0, "conditional sample: ancestor has zero weight");
    // Row i of the coupling: diagonal mass alpha * mu_i out of w_i.
    const double stay = c.alpha * c.mu[i] / w[i];
    const double u = s.uniform();
    const double v = s.uniform();
    out[k] = u < stay ? i : right.sample(v);
  }
  return out;
}

AncestorPairs sample_pairs(const Matrix& p, std::size_t n, const SeedKey& key) {
  detail::require_dims(p.rows() == p.cols(), "sample_pairs: coupling must be square");
  const auto m = static_cast<std::size_t>(p.rows());
  AncestorPairs out{Ancestors(n), Ancestors(n)};
  if (n == 0) return out;
  std::vector<double> cdf(m * m);
  double acc = 0.0;
  for (std::size_t f = 0; f < m * m; ++f) {
    acc += p.data()[f];
    cdf[f] = acc;
  }
  Stream s(key);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = s.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto f = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                               static_cast<std::ptrdiff_t>(m * m - 1)));
    while (f > 0 && p.data()[f] <= 0.0) --f;  // never land on a zero cell at the top edge
    out.a[k] = f / m;
    out.a_tilde[k] = f % m;
  }
  return out;
}

Ancestors conditional_sample(const Matrix& p, const Ancestors& a, const SeedKey& key) {
  const auto m = static_cast<std::size_t>(p.cols());
  Stream s(key);
  Ancestors out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    detail::require(a[k] < static_cast<std::size_t>(p.rows()), "conditional sample: ancestor out of range");
    const auto row = p.row(static_cast<Eigen::Index>(a[k]));
    const double mass = row.sum();
    detail::require(mass > 0.0, "conditional sample: coupling row has zero mass");
    out[k] = inverse_cdf(ConstSpan(row.data(), m), s.uniform() * mass);
  }
  return out;
}

}  // namespace coupledpf
