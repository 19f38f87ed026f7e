#include "coupledpf/scheme.hpp"

#include <algorithm>
#include <utility>

namespace coupledpf {

SchemeKind parse_scheme(std::string_view name) {
  if (name == "independent") return SchemeKind::independent;
  if (name == "index-coupled") return SchemeKind::index_coupled;
  if (name == "sorted") return SchemeKind::sorted;
  if (name == "transport") return SchemeKind::transport;
  if (name == "transport-symmetrized") return SchemeKind::transport_symmetrized;
  if (name == "naive-systematic") return SchemeKind::naive_systematic;
  throw InvalidArgument("unknown scheme '" + std::string(name) + "'");
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::independent: return "independent";
    case SchemeKind::index_coupled: return "index-coupled";
    case SchemeKind::sorted: return "sorted";
    case SchemeKind::transport: return "transport";
    case SchemeKind::transport_symmetrized: return "transport-symmetrized";
    case SchemeKind::naive_systematic: return "naive-systematic";
  }
  return "unknown";
}

bool resamples_marginally(SchemeKind kind) {
  return kind == SchemeKind::sorted || kind == SchemeKind::naive_systematic;
}

bool identical_systems(const Matrix& x, ConstSpan w, const Matrix& x_tilde, ConstSpan w_tilde) {
  if (w.size() != w_tilde.size() || x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols()) {
    return false;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != w_tilde[i]) return false;
  }
  return (x.array() == x_tilde.array()).all();
}

CouplingMatrix coupling_matrix(const Scheme& scheme, const Matrix& x, ConstSpan w,
                               const Matrix& x_tilde, ConstSpan w_tilde) {
  switch (scheme.kind) {
    case SchemeKind::independent: {
      CouplingMatrix c;
      c.row_marginal.assign(w.begin(), w.end());
      c.col_marginal.assign(w_tilde.begin(), w_tilde.end());
      const Eigen::Map<const Vector> a(w.data(), static_cast<Eigen::Index>(w.size()));
      const Eigen::Map<const Vector> b(w_tilde.data(), static_cast<Eigen::Index>(w_tilde.size()));
      c.p = a * b.transpose();
      return c;
    }
    case SchemeKind::index_coupled: {
      CouplingMatrix c;
      c.row_marginal.assign(w.begin(), w.end());
      c.col_marginal.assign(w_tilde.begin(), w_tilde.end());
      c.p = index_coupled_build(w, w_tilde).dense();
      return c;
    }
    case SchemeKind::transport:
      return transport_coupling(w, x, w_tilde, x_tilde, scheme.transport);
    case SchemeKind::transport_symmetrized:
      return symmetrized_transport(w, x, w_tilde, x_tilde, scheme.transport);
    default:
      throw UnsupportedOperation(scheme_name(scheme.kind) + " has no coupling-matrix form");
  }
}

Ancestors sorted_resample(const Matrix& x, ConstSpan w, std::size_t n, double u,
                          const BoundingBox& box, unsigned order) {
  return systematic(w, n, u, hilbert_sort(x, box, order));
}

namespace {

// One uniformly random permutation applied to both vectors, so that every
// slot has the resampling marginal instead of a position-dependent one.
void shuffle_pairs(AncestorPairs& pairs, Stream& stream) {
  for (std::size_t i = pairs.a.size(); i > 1; --i) {
    const auto j = std::min(i - 1, static_cast<std::size_t>(stream.uniform() * static_cast<double>(i)));
    std::swap(pairs.a[i - 1], pairs.a[j]);
    std::swap(pairs.a_tilde[i - 1], pairs.a_tilde[j]);
  }
}

}  // namespace

AncestorPairs coupled_resample(const Scheme& scheme, const Matrix& x, ConstSpan w,
                               const Matrix& x_tilde, ConstSpan w_tilde, std::size_t n,
                               const SeedKey& key) {
  detail::require_dims(w.size() == w_tilde.size() && x.rows() == x_tilde.rows(),
                       "coupled resampling: systems differ in size");
  if (scheme.kind != SchemeKind::sorted && scheme.kind != SchemeKind::naive_systematic &&
      identical_systems(x, w, x_tilde, w_tilde)) {
    AncestorPairs out;
    out.a = multinomial(w, n, key);
    out.a_tilde = out.a;
    return out;
  }
  switch (scheme.kind) {
    case SchemeKind::independent:
      return independent_coupling_sample(w, w_tilde, n, key);
    case SchemeKind::index_coupled:
      return index_coupled_sample(index_coupled_build(w, w_tilde), n, key);
    case SchemeKind::sorted: {
      const unsigned order = scheme.hilbert_order != 0
                                 ? scheme.hilbert_order
                                 : default_hilbert_order(static_cast<std::size_t>(x.cols()));
      const BoundingBox box = merge(bounding_box(x), bounding_box(x_tilde));
      Stream stream(key);
      const double u = stream.uniform();
      AncestorPairs out{sorted_resample(x, w, n, u, box, order),
                        sorted_resample(x_tilde, w_tilde, n, u, box, order)};
      shuffle_pairs(out, stream);
      return out;
    }
    case SchemeKind::naive_systematic: {
      Stream stream(key);
      const double u = stream.uniform();
      AncestorPairs out{systematic(w, n, u), systematic(w_tilde, n, u)};
      shuffle_pairs(out, stream);
      return out;
    }
    case SchemeKind::transport:
    case SchemeKind::transport_symmetrized:
      return sample_pairs(coupling_matrix(scheme, x, w, x_tilde, w_tilde).p, n, key);
  }
  throw InvalidArgument("coupled resampling: unknown scheme");
}

Ancestors conditional_resample(const Scheme& scheme, const Matrix& x, ConstSpan w,
                               const Ancestors& a, const Matrix& x_tilde, ConstSpan w_tilde,
                               const SeedKey& key) {
  if (identical_systems(x, w, x_tilde, w_tilde)) return a;
  switch (scheme.kind) {
    case SchemeKind::independent:
      return multinomial(w_tilde, a.size(), key);
    case SchemeKind::index_coupled:
      return index_coupled_conditional(index_coupled_build(w, w_tilde), w, a, key);
    case SchemeKind::transport:
    case SchemeKind::transport_symmetrized:
      return conditional_sample(coupling_matrix(scheme, x, w, x_tilde, w_tilde).p, a, key);
    default:
      throw UnsupportedOperation(scheme_name(scheme.kind) +
                                 " resamples each system from its own variables; no conditional form");
  }
}

}  // namespace coupledpf
