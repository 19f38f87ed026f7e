#pragma once

#include <functional>
#include <vector>

#include "coupledpf/types.hpp"

namespace coupledpf::stats {

double log_sum_exp(ConstSpan values);

/// Normalizes log-weights in place so that log_sum_exp == 0; returns the
/// log of the original total. Returns -inf (and leaves values) when all are -inf.
double normalize_log_weights(std::span<double> log_weights);

/// Linear weights exp(lw) for already-normalized log-weights.
std::vector<double> to_weights(ConstSpan normalized_log_weights);

double mean(ConstSpan x);
/// Unbiased sample variance (denominator n - 1).
double variance(ConstSpan x);
double sd(ConstSpan x);
/// Pearson correlation; throws InvalidArgument when either input is constant.
double correlation(ConstSpan x, ConstSpan y);
/// Median; averages the two middle values for even sizes.
double median(std::vector<double> x);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// One-sample KS statistic against a continuous CDF.
double ks_statistic(std::vector<double> a, const std::function<double(double)>& cdf);
/// Asymptotic p-value of the Kolmogorov distribution for scaled statistic sqrt(n_eff) * D.
double kolmogorov_pvalue(double d, double n_eff);

}  // namespace coupledpf::stats
