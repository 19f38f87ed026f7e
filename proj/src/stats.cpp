#include "coupledpf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coupledpf::stats {

double log_sum_exp(ConstSpan values) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

double normalize_log_weights(std::span<double> log_weights) {
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) return total;
  for (double& v : log_weights) v -= total;
  return total;
}

std::vector<double> to_weights(ConstSpan lw) {
  std::vector<double> w(lw.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    w[i] = std::exp(lw[i]);
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

double mean(ConstSpan x) {
  detail::require(!x.empty(), "mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(ConstSpan x) {
  detail::require(x.size() >= 2, "variance needs at least two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double sd(ConstSpan x) { return std::sqrt(variance(x)); }

double correlation(ConstSpan x, ConstSpan y) {
  detail::require_dims(x.size() == y.size(), "correlation: sample sizes differ");
  detail::require(x.size() >= 2, "correlation needs at least two pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  detail::require(sxx > 0.0 && syy > 0.0, "correlation undefined for a constant column");
  return sxy / std::sqrt(sxx * syy);
}

double median(std::vector<double> x) {
  detail::require(!x.empty(), "median of an empty sample");
  const std::size_t n = x.size();
  std::sort(x.begin(), x.end());
  return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  detail::require(!a.empty() && !b.empty(), "ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic(std::vector<double> a, const std::function<double(double)>& cdf) {
  detail::require(!a.empty(), "ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double kolmogorov_pvalue(double d, double n_eff) {
  const double sn = std::sqrt(n_eff);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace coupledpf::stats
