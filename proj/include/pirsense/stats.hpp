#pragma once

#include <vector>

namespace pirsense {

/// Empirical p-quantile of an ascending-sorted sample: the ceil(n*p)-th
/// order statistic. This is the single place that fixes the bootstrap
/// quantile convention; swap the rule here to experiment with alternates.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Convenience overload that copies and sorts.
double quantile(std::vector<double> values, double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile function, accurate to full double precision.
double normal_quantile(double p);

}  // namespace pirsense
