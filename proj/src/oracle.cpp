#include "coupledpf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "coupledpf/stats.hpp"

namespace coupledpf {

LinearGaussianSpec hidden_ar_spec(double theta, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  LinearGaussianSpec s;
  s.a.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      s.a(i, j) = std::pow(theta, static_cast<double>(std::abs(i - j) + 1));
    }
  }
  s.q = Matrix::Identity(d, d);
  s.c = Matrix::Identity(d, d);
  s.r = Matrix::Identity(d, d);
  s.m0 = Vector::Zero(d);
  s.p0 = Matrix::Identity(d, d);
  return s;
}

LinearGaussianSpec unlikely_observation_spec(std::size_t observation_time) {
  LinearGaussianSpec s;
  s.a = Matrix::Constant(1, 1, 0.9);
  s.q = Matrix::Constant(1, 1, 0.01);
  s.c = Matrix::Constant(1, 1, 1.0);
  s.r = Matrix::Constant(1, 1, 0.01);
  s.m0 = Vector::Zero(1);
  s.p0 = Matrix::Constant(1, 1, 0.01);
  s.observed.assign(observation_time, false);
  s.observed.back() = true;
  return s;
}

namespace {

using DenseMatrix = Eigen::MatrixXd;

void check_spec(const LinearGaussianSpec& s, const Observations& y) {
  const auto d = s.a.rows();
  detail::require_dims(s.a.cols() == d && s.q.rows() == d && s.q.cols() == d && s.m0.size() == d &&
                           s.p0.rows() == d && s.p0.cols() == d && s.c.cols() == d &&
                           s.r.rows() == s.c.rows() && s.r.cols() == s.c.rows(),
                       "linear-Gaussian spec: inconsistent matrix sizes");
  detail::require_dims(static_cast<Eigen::Index>(y.dim()) == s.c.rows(),
                       "linear-Gaussian spec: observation dimension mismatch");
  detail::require_dims(s.observed.empty() || s.observed.size() == y.horizon(),
                       "linear-Gaussian spec: observation mask has the wrong length");
}

bool is_observed(const LinearGaussianSpec& s, std::size_t t) {
  return s.observed.empty() || s.observed[t - 1];
}

DenseMatrix symmetrize(const DenseMatrix& m) { return 0.5 * (m + m.transpose()); }

struct FilterPass {
  KalmanResult result;
  std::vector<DenseMatrix> predicted_covs;  ///< t = 1..T stored at index t
  std::vector<Vector> predicted_means;
};

FilterPass run_filter(const LinearGaussianSpec& s, const Observations& y) {
  check_spec(s, y);
  const std::size_t horizon = y.horizon();
  const DenseMatrix a = s.a, q = s.q, c = s.c, r = s.r;
  const auto d = a.rows();
  FilterPass pass;
  pass.predicted_covs.resize(horizon + 1);
  pass.predicted_means.resize(horizon + 1);
  Vector m = s.m0;
  DenseMatrix p = s.p0;
  pass.result.means.push_back(m);
  pass.result.covs.push_back(p);
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  for (std::size_t t = 1; t <= horizon; ++t) {
    m = a * m;
    p = symmetrize(a * p * a.transpose() + q);
    pass.predicted_means[t] = m;
    pass.predicted_covs[t] = p;
    if (is_observed(s, t)) {
      const auto yt = y.at(t);
      const Vector obs = Eigen::Map<const Vector>(yt.data(), static_cast<Eigen::Index>(yt.size()));
      const Vector innov = obs - c * m;
      const DenseMatrix scov = symmetrize(c * p * c.transpose() + r);
      const Eigen::LLT<DenseMatrix> llt(scov);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("kalman: innovation covariance is not positive definite");
      }
      const Vector solved = llt.solve(innov);
      const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      pass.result.loglik += -0.5 * (static_cast<double>(innov.size()) * kLog2Pi + logdet + innov.dot(solved));
      const DenseMatrix gain = llt.solve(c * p).transpose();
      m = m + gain * innov;
      const DenseMatrix ikc = DenseMatrix::Identity(d, d) - gain * c;
      p = symmetrize(ikc * p * ikc.transpose() + gain * r * gain.transpose());
    }
    pass.result.means.push_back(m);
    pass.result.covs.push_back(p);
  }
  return pass;
}

}  // namespace

KalmanResult kalman_filter(const LinearGaussianSpec& spec, const Observations& y) {
  return run_filter(spec, y).result;
}

SmootherResult kalman_smoother(const LinearGaussianSpec& spec, const Observations& y) {
  const FilterPass pass = run_filter(spec, y);
  const std::size_t horizon = y.horizon();
  const DenseMatrix a = spec.a;
  SmootherResult out;
  out.means.resize(horizon + 1);
  out.covs.resize(horizon + 1);
  out.means[horizon] = pass.result.means[horizon];
  out.covs[horizon] = pass.result.covs[horizon];
  for (std::size_t t = horizon; t-- > 0;) {
    const DenseMatrix pf = pass.result.covs[t];
    const DenseMatrix pp = pass.predicted_covs[t + 1];
    const DenseMatrix g = pp.ldlt().solve(a * pf).transpose();
    out.means[t] = pass.result.means[t] + g * (out.means[t + 1] - pass.predicted_means[t + 1]);
    out.covs[t] = symmetrize(pf + g * (DenseMatrix(out.covs[t + 1]) - pp) * g.transpose());
  }
  return out;
}

namespace {

struct JointGaussian {
  Vector state_mean;   ///< stacked x_0..x_T
  DenseMatrix state_cov;
  DenseMatrix obs_map;  ///< stacked observed y's = obs_map * states + noise
  DenseMatrix obs_noise;
  Vector obs;
};

JointGaussian build_joint(const LinearGaussianSpec& s, const Observations& y) {
  check_spec(s, y);
  const std::size_t horizon = y.horizon();
  const auto d = s.a.rows();
  const auto dy = s.c.rows();
  const DenseMatrix a = s.a;
  const auto total = static_cast<Eigen::Index>(horizon + 1) * d;
  JointGaussian j;
  j.state_mean.resize(total);
  j.state_cov.resize(total, total);
  std::vector<DenseMatrix> marg(horizon + 1);
  Vector m = s.m0;
  marg[0] = s.p0;
  j.state_mean.segment(0, d) = m;
  for (std::size_t t = 1; t <= horizon; ++t) {
    m = a * m;
    marg[t] = a * marg[t - 1] * a.transpose() + DenseMatrix(s.q);
    j.state_mean.segment(static_cast<Eigen::Index>(t) * d, d) = m;
  }
  for (std::size_t r = 0; r <= horizon; ++r) {
    DenseMatrix block = marg[r];
    for (std::size_t t = r; t <= horizon; ++t) {
      const auto rr = static_cast<Eigen::Index>(r) * d;
      const auto tt = static_cast<Eigen::Index>(t) * d;
      j.state_cov.block(tt, rr, d, d) = block;
      j.state_cov.block(rr, tt, d, d) = block.transpose();
      block = a * block;
    }
  }
  std::vector<std::size_t> times;
  for (std::size_t t = 1; t <= horizon; ++t) {
    if (is_observed(s, t)) times.push_back(t);
  }
  const auto nobs = static_cast<Eigen::Index>(times.size()) * dy;
  j.obs_map = DenseMatrix::Zero(nobs, total);
  j.obs_noise = DenseMatrix::Zero(nobs, nobs);
  j.obs.resize(nobs);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i) * dy;
    j.obs_map.block(row, static_cast<Eigen::Index>(times[i]) * d, dy, d) = s.c;
    j.obs_noise.block(row, row, dy, dy) = s.r;
    const auto yt = y.at(times[i]);
    for (Eigen::Index k = 0; k < dy; ++k) j.obs(row + k) = yt[static_cast<std::size_t>(k)];
  }
  return j;
}

}  // namespace

double dense_gaussian_loglik(const LinearGaussianSpec& spec, const Observations& y) {
  const JointGaussian j = build_joint(spec, y);
  if (j.obs.size() == 0) return 0.0;
  const DenseMatrix cov = j.obs_map * j.state_cov * j.obs_map.transpose() + j.obs_noise;
  const Vector resid = j.obs - j.obs_map * j.state_mean;
  const Eigen::LLT<DenseMatrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("dense oracle: covariance not positive definite");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  return -0.5 * (static_cast<double>(resid.size()) * kLog2Pi + logdet + resid.dot(llt.solve(resid)));
}

std::vector<Vector> dense_gaussian_smoothing_means(const LinearGaussianSpec& spec,
                                                   const Observations& y) {
  const JointGaussian j = build_joint(spec, y);
  Vector mean = j.state_mean;
  if (j.obs.size() > 0) {
    const DenseMatrix cov = j.obs_map * j.state_cov * j.obs_map.transpose() + j.obs_noise;
    const DenseMatrix cross = j.state_cov * j.obs_map.transpose();
    mean += cross * cov.ldlt().solve(j.obs - j.obs_map * j.state_mean);
  }
  const auto d = spec.a.rows();
  std::vector<Vector> out(y.horizon() + 1);
  for (std::size_t t = 0; t <= y.horizon(); ++t) out[t] = mean.segment(static_cast<Eigen::Index>(t) * d, d);
  return out;
}

GridPosterior grid_posterior(const std::function<double(double)>& loglik,
                             const std::function<double(double)>& log_prior,
                             const std::vector<double>& grid) {
  detail::require(!grid.empty(), "grid_posterior: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    detail::require(grid[i] > grid[i - 1], "grid_posterior: grid must be strictly increasing");
  }
  GridPosterior out;
  out.grid = grid;
  std::vector<double> lp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double prior = log_prior(grid[i]);
    lp[i] = prior == -std::numeric_limits<double>::infinity() ? prior : prior + loglik(grid[i]);
  }
  const double top = *std::max_element(lp.begin(), lp.end());
  if (!std::isfinite(top)) throw NumericalError("grid_posterior: every grid point has zero mass");
  out.density.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.density[i] = std::exp(lp[i] - top);
  if (grid.size() == 1) {
    out.density[0] = 1.0;
    out.mean = grid[0];
    return out;
  }
  auto trapezoid = [&](auto f) {
    double acc = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      acc += 0.5 * (f(i) + f(i - 1)) * (grid[i] - grid[i - 1]);
    }
    return acc;
  };
  const double z = trapezoid([&](std::size_t i) { return out.density[i]; });
  for (auto& v : out.density) v /= z;
  out.mean = trapezoid([&](std::size_t i) { return grid[i] * out.density[i]; });
  const double second = trapezoid([&](std::size_t i) { return grid[i] * grid[i] * out.density[i]; });
  out.sd = std::sqrt(std::max(second - out.mean * out.mean, 0.0));
  return out;
}

std::vector<JointOutcome> enumerate_coupling(const Matrix& p) {
  detail::require_dims(p.rows() == p.cols(), "enumerate_coupling: matrix must be square");
  const auto n = static_cast<std::size_t>(p.rows());
  detail::require(n >= 1 && n <= 3, "enumerate_coupling: supports 1 <= N <= 3");
  const std::size_t cells = n * n;
  std::size_t outcomes = 1;
  for (std::size_t k = 0; k < n; ++k) outcomes *= cells;
  std::vector<JointOutcome> out;
  out.reserve(outcomes);
  for (std::size_t code = 0; code < outcomes; ++code) {
    JointOutcome o{Ancestors(n), Ancestors(n), 1.0};
    std::size_t rest = code;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t cell = rest % cells;
      rest /= cells;
      o.a[k] = cell / n;
      o.a_tilde[k] = cell % n;
      o.prob *= p(static_cast<Eigen::Index>(o.a[k]), static_cast<Eigen::Index>(o.a_tilde[k]));
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace coupledpf
