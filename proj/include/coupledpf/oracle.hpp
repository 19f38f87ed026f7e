#pragma once

#include <functional>
#include <vector>

#include "coupledpf/resampling.hpp"
#include "coupledpf/types.hpp"

namespace coupledpf {

/// x_0 ~ N(m0, P0), x_t = A x_{t-1} + N(0, Q), y_t = C x_t + N(0, R).
struct LinearGaussianSpec {
  Matrix a;
  Matrix q;
  Matrix c;
  Matrix r;
  Vector m0;
  Matrix p0;
  /// Times 1..T that carry an observation; empty means every time.
  std::vector<bool> observed;
};

/// The hidden auto-regressive model at theta as a linear-Gaussian spec.
LinearGaussianSpec hidden_ar_spec(double theta, std::size_t dim);
/// The unlikely-observation model: observed only at `observation_time`.
LinearGaussianSpec unlikely_observation_spec(std::size_t observation_time);

struct KalmanResult {
  double loglik = 0.0;
  std::vector<Vector> means;  ///< filtering means, t = 0..T (t = 0 is the prior)
  std::vector<Matrix> covs;
};

KalmanResult kalman_filter(const LinearGaussianSpec& spec, const Observations& y);

struct SmootherResult {
  std::vector<Vector> means;  ///< t = 0..T
  std::vector<Matrix> covs;
};

/// Rauch-Tung-Striebel backward pass.
SmootherResult kalman_smoother(const LinearGaussianSpec& spec, const Observations& y);

/// Log-likelihood from the joint Gaussian law of all observations; O((T d)^3).
double dense_gaussian_loglik(const LinearGaussianSpec& spec, const Observations& y);
/// Smoothing means by conditioning the joint Gaussian of states and observations.
std::vector<Vector> dense_gaussian_smoothing_means(const LinearGaussianSpec& spec,
                                                   const Observations& y);

struct GridPosterior {
  std::vector<double> grid;
  std::vector<double> density;  ///< trapezoid-normalized; a single point gets mass 1
  double mean = 0.0;
  double sd = 0.0;
};

/// Posterior on a sorted 1-d grid from a log-likelihood and a log-prior.
GridPosterior grid_posterior(const std::function<double(double)>& loglik,
                             const std::function<double(double)>& log_prior,
                             const std::vector<double>& grid);

struct JointOutcome {
  Ancestors a;
  Ancestors a_tilde;
  double prob = 0.0;
};

/// Exact law of N i.i.d. pairs from P over all (a, a_tilde), N <= 3.
std::vector<JointOutcome> enumerate_coupling(const Matrix& p);

}  // namespace coupledpf
