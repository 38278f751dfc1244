#pragma once

#include <span>
#include <vector>

namespace consensus::stats {

double mean(std::span<const double> xs);

/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

/// Standard error of the mean.
double standard_error(std::span<const double> xs);

/// Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted data.
double quantile(std::vector<double> xs, double p);

/// Same, for data already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace consensus::stats
