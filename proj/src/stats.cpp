#include "consensus/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "consensus/error.hpp"

namespace consensus::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidInput("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidInput("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile level outside [0,1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, p);
}

}  // namespace consensus::stats
