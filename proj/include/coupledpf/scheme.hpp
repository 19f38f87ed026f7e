#pragma once

#include <string>
#include <string_view>

#include "coupledpf/hilbert.hpp"
#include "coupledpf/resampling.hpp"
#include "coupledpf/transport.hpp"

namespace coupledpf {

enum class SchemeKind {
  independent,
  index_coupled,
  sorted,
  transport,
  transport_symmetrized,
  /// Systematic resampling of each system in index order with one shared
  /// uniform. Only a baseline for meeting-time comparisons.
  naive_systematic,
};

/// Parses "independent", "index-coupled", "sorted", "transport",
/// "transport-symmetrized" or "naive-systematic".
SchemeKind parse_scheme(std::string_view name);
std::string scheme_name(SchemeKind kind);

struct Scheme {
  SchemeKind kind = SchemeKind::index_coupled;
  TransportOptions transport;
  unsigned hilbert_order = 0;  ///< 0 picks default_hilbert_order(d_x)
};

/// True when both weights and locations agree bitwise.
bool identical_systems(const Matrix& x, ConstSpan w, const Matrix& x_tilde, ConstSpan w_tilde);

/// Dense coupling matrix of a matrix-form scheme (independent, index-coupled,
/// transport, transport-symmetrized).
CouplingMatrix coupling_matrix(const Scheme& scheme, const Matrix& x, ConstSpan w,
                               const Matrix& x_tilde, ConstSpan w_tilde);

/// n ancestor pairs drawn jointly. Identical systems always give a = a_tilde.
AncestorPairs coupled_resample(const Scheme& scheme, const Matrix& x, ConstSpan w,
                               const Matrix& x_tilde, ConstSpan w_tilde, std::size_t n,
                               const SeedKey& key);

/// Second-system ancestors given the first system's ancestors `a`, for the
/// schemes whose coupling has a conditional form.
Ancestors conditional_resample(const Scheme& scheme, const Matrix& x, ConstSpan w,
                               const Ancestors& a, const Matrix& x_tilde, ConstSpan w_tilde,
                               const SeedKey& key);

/// Systematic resampling of one cloud in Hilbert order within `box`, at uniform u.
Ancestors sorted_resample(const Matrix& x, ConstSpan w, std::size_t n, double u,
                          const BoundingBox& box, unsigned order);

/// Schemes where each system resamples from its own variables only.
bool resamples_marginally(SchemeKind kind);

}  // namespace coupledpf
