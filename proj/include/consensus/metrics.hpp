#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace consensus {

using ValueMap = std::map<std::string, double>;
using GroupMap = std::map<std::string, std::string>;

struct PointMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
};

struct RawMetrics {
  PointMetrics micro;
  /// Unweighted mean of per-group RMSE and MAE; only present when groups are
  /// given. R^2 is not averaged across groups.
  std::optional<PointMetrics> macro;
};

/// Throws InvalidInput when the key sets differ or are empty, and
/// UndefinedMetric when the actuals are constant (R^2 has no denominator).
RawMetrics score(const ValueMap& predictions, const ValueMap& actuals,
                 const GroupMap* groups = nullptr);

struct Interval {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct MetricIntervals {
  Interval rmse;
  Interval mae;
  std::optional<Interval> r2;
};

struct EvalReport {
  MetricIntervals micro;
  std::optional<MetricIntervals> macro;
  std::size_t n_bootstrap = 0;
  double ci_level = 0.95;
};

inline constexpr std::size_t kDefaultBootstrap = 1000;

/// Pair bootstrap: resamples (prediction, actual) pairs with replacement
/// (within each group for the macro figures) and takes empirical quantiles
/// at (1 -/+ ci_level)/2. Point values are the non-resampled scores; each
/// interval is widened if needed so that it contains its point value.
EvalReport bootstrap_report(const ValueMap& predictions, const ValueMap& actuals,
                            const GroupMap* groups, std::size_t n_bootstrap, double ci_level,
                            std::uint64_t seed);

}  // namespace consensus
