#pragma once

#include <vector>

#include "coupledpf/types.hpp"

namespace coupledpf {

/// Joint ancestor law with its two prescribed margins.
struct CouplingMatrix {
  Matrix p;
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
};

/// Euclidean distances between the rows of x and the rows of x_tilde.
Matrix distance_matrix(const Matrix& x, const Matrix& x_tilde);

/// frac * median(D); falls back to the mean positive entry (or 1) when the median is 0.
double default_epsilon(const Matrix& d, double frac);

struct SinkhornResult {
  Matrix plan;       ///< diag(u) K diag(v), total mass 1
  double alpha = 0;  ///< achieved correction bound
  int iterations = 0;
};

/// Entropic transport by alternating scalings, stopped once the marginal
/// correction bound reaches `alpha_target` or after `max_iter` sweeps.
/// Throws NumericalError when the kernel underflows on a row or column with mass.
SinkhornResult sinkhorn(const Matrix& d, ConstSpan w, ConstSpan w_tilde, double epsilon,
                        double alpha_target, int max_iter);

/// min_i min(w_i / (P 1)_i, w_tilde_i / (P^T 1)_i), capped at 1; a zero denominator counts as +inf.
double correction_bound(const Matrix& p, ConstSpan w, ConstSpan w_tilde);

/// Mixes the approximate plan with an independent residual coupling so that
/// the margins are exactly w and w_tilde.
CouplingMatrix marginal_correction(const Matrix& p_hat, ConstSpan w, ConstSpan w_tilde);

struct TransportOptions {
  double epsilon_frac = 0.05;
  double alpha_target = 0.95;
  int max_iter = 1000;
};

/// Sinkhorn on the distance matrix of the two clouds, then marginal correction.
CouplingMatrix transport_coupling(ConstSpan w, const Matrix& x, ConstSpan w_tilde,
                                  const Matrix& x_tilde, const TransportOptions& options = {});

/// Average of the forward plan and the transpose of the plan with the systems swapped.
CouplingMatrix symmetrized_transport(ConstSpan w, const Matrix& x, ConstSpan w_tilde,
                                     const Matrix& x_tilde, const TransportOptions& options = {});

}  // namespace coupledpf
