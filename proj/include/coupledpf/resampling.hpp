#pragma once

#include <cstddef>
#include <vector>

#include "coupledpf/rng.hpp"
#include "coupledpf/types.hpp"

namespace coupledpf {

/// Ancestor indices, 0-based.
using Ancestors = std::vector<std::size_t>;

struct AncestorPairs {
  Ancestors a;
  Ancestors a_tilde;
};

/// Throws InvalidArgument unless entries are >= 0 and sum to 1 within 1e-10.
void check_weights(ConstSpan w);

/// Walker alias table: O(N) build, O(1) draw from one uniform.
class AliasTable {
 public:
  explicit AliasTable(ConstSpan w);
  [[nodiscard]] std::size_t sample(double u) const;
  [[nodiscard]] std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

/// Inverse-CDF draw of one index at uniform u; skips zero-weight entries.
std::size_t inverse_cdf(ConstSpan w, double u);

/// n i.i.d. draws from w.
Ancestors multinomial(ConstSpan w, std::size_t n, const SeedKey& key);

/// Systematic resampling along `order` (a permutation of 0..N-1) with a single
/// uniform: the k-th draw inverts the ordered CDF at (k + u) / n.
Ancestors systematic(ConstSpan w, std::size_t n, double u, const std::vector<std::size_t>& order);
Ancestors systematic(ConstSpan w, std::size_t n, double u);

AncestorPairs independent_coupling_sample(ConstSpan w, ConstSpan w_tilde, std::size_t n,
                                          const SeedKey& key);

/// alpha * diag(mu) + (1 - alpha) * r r_tilde^T, the coupling with maximal trace.
/// Residuals are empty when alpha == 1.
struct StructuredCoupling {
  double alpha = 1.0;
  std::vector<double> mu;
  std::vector<double> r;
  std::vector<double> r_tilde;

  [[nodiscard]] std::size_t size() const { return mu.size(); }
  [[nodiscard]] Matrix dense() const;
};

StructuredCoupling index_coupled_build(ConstSpan w, ConstSpan w_tilde);
AncestorPairs index_coupled_sample(const StructuredCoupling& c, std::size_t n, const SeedKey& key);
/// a_tilde^k drawn from row a^k of the coupling, given the row marginal w.
Ancestors index_coupled_conditional(const StructuredCoupling& c, ConstSpan w, const Ancestors& a,
                                    const SeedKey& key);

/// n i.i.d. pairs from a dense joint matrix via the flattened CDF.
AncestorPairs sample_pairs(const Matrix& p, std::size_t n, const SeedKey& key);
/// a_tilde^k ~ P[a^k, .] / w[a^k]. Throws InvalidArgument on an empty row.
Ancestors conditional_sample(const Matrix& p, const Ancestors& a, const SeedKey& key);

}  // namespace coupledpf
