#include "consensus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "consensus/error.hpp"
#include "consensus/random.hpp"
#include "consensus/stats.hpp"

namespace consensus {

namespace {

struct Pair {
  double prediction;
  double actual;
};

// rmse, mae, and r2 (NaN when the actuals are constant).
PointMetrics compute(const std::vector<Pair>& pairs) {
  double se = 0.0, ae = 0.0, mean_actual = 0.0;
  for (const auto& p : pairs) {
    const double err = p.prediction - p.actual;
    se += err * err;
    ae += std::abs(err);
    mean_actual += p.actual;
  }
  const double n = static_cast<double>(pairs.size());
  mean_actual /= n;
  double ss_tot = 0.0;
  for (const auto& p : pairs) ss_tot += (p.actual - mean_actual) * (p.actual - mean_actual);
  return {std::sqrt(se / n), ae / n, ss_tot > 0.0 ? 1.0 - se / ss_tot : std::nan("")};
}

std::vector<Pair> align(const ValueMap& predictions, const ValueMap& actuals) {
  if (predictions.empty()) throw InvalidInput("no predictions to score");
  if (predictions.size() != actuals.size()) {
    throw InvalidInput("prediction and actual key sets differ in size (" +
                       std::to_string(predictions.size()) + " vs " +
                       std::to_string(actuals.size()) + ")");
  }
  std::vector<Pair> pairs;
  pairs.reserve(predictions.size());
  for (const auto& [id, pred] : predictions) {
    auto it = actuals.find(id);
    if (it == actuals.end()) throw InvalidInput("no actual for quantity '" + id + "'");
    pairs.push_back({pred, it->second});
  }
  return pairs;
}

std::map<std::string, std::vector<Pair>> split_groups(const ValueMap& predictions,
                                                      const ValueMap& actuals,
                                                      const GroupMap& groups) {
  std::map<std::string, std::vector<Pair>> out;
  for (const auto& [id, pred] : predictions) {
    auto g = groups.find(id);
    if (g == groups.end()) throw InvalidInput("quantity '" + id + "' has no group");
    out[g->second].push_back({pred, actuals.at(id)});
  }
  return out;
}

PointMetrics macro_of(const std::map<std::string, std::vector<Pair>>& by_group) {
  PointMetrics m{0.0, 0.0, std::nan("")};
  for (const auto& [g, pairs] : by_group) {
    const auto pm = compute(pairs);
    m.rmse += pm.rmse;
    m.mae += pm.mae;
  }
  m.rmse /= static_cast<double>(by_group.size());
  m.mae /= static_cast<double>(by_group.size());
  return m;
}

std::vector<Pair> resample(const std::vector<Pair>& pairs, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  std::vector<Pair> out(pairs.size());
  for (auto& p : out) p = pairs[pick(rng)];
  return out;
}

Interval interval(double point, std::vector<double> replicates, double ci_level) {
  Interval iv{point, point, point};
  if (replicates.empty()) return iv;
  std::sort(replicates.begin(), replicates.end());
  const double tail = 0.5 * (1.0 - ci_level);
  iv.ci_low = std::min(point, stats::quantile_sorted(replicates, tail));
  iv.ci_high = std::max(point, stats::quantile_sorted(replicates, 1.0 - tail));
  return iv;
}

}  // namespace

RawMetrics score(const ValueMap& predictions, const ValueMap& actuals, const GroupMap* groups) {
  const auto pairs = align(predictions, actuals);
  RawMetrics out;
  out.micro = compute(pairs);
  if (std::isnan(out.micro.r2)) throw UndefinedMetric("R^2 is undefined for constant actuals");
  if (groups) out.macro = macro_of(split_groups(predictions, actuals, *groups));
  return out;
}

EvalReport bootstrap_report(const ValueMap& predictions, const ValueMap& actuals,
                            const GroupMap* groups, std::size_t n_bootstrap, double ci_level,
                            std::uint64_t seed) {
  if (n_bootstrap < 100) throw InvalidInput("n_bootstrap must be at least 100");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw InvalidInput("ci_level must lie in (0, 1)");
  const RawMetrics point = score(predictions, actuals, groups);
  const auto pairs = align(predictions, actuals);

  EvalReport report;
  report.n_bootstrap = n_bootstrap;
  report.ci_level = ci_level;

  {
    Rng rng(derive_stream_seed(seed, 0, 0));
    std::vector<double> rmse, mae, r2;
    for (std::size_t b = 0; b < n_bootstrap; ++b) {
      const auto m = compute(resample(pairs, rng));
      rmse.push_back(m.rmse);
      mae.push_back(m.mae);
      if (!std::isnan(m.r2)) r2.push_back(m.r2);
    }
    report.micro.rmse = interval(point.micro.rmse, std::move(rmse), ci_level);
    report.micro.mae = interval(point.micro.mae, std::move(mae), ci_level);
    report.micro.r2 = interval(point.micro.r2, std::move(r2), ci_level);
  }

  if (groups) {
    const auto by_group = split_groups(predictions, actuals, *groups);
    Rng rng(derive_stream_seed(seed, 1, 0));
    std::vector<double> rmse, mae;
    for (std::size_t b = 0; b < n_bootstrap; ++b) {
      std::map<std::string, std::vector<Pair>> replicate;
      for (const auto& [g, gp] : by_group) replicate.emplace(g, resample(gp, rng));
      const auto m = macro_of(replicate);
      rmse.push_back(m.rmse);
      mae.push_back(m.mae);
    }
    MetricIntervals macro;
    macro.rmse = interval(point.macro->rmse, std::move(rmse), ci_level);
    macro.mae = interval(point.macro->mae, std::move(mae), ci_level);
    report.macro = macro;
  }
  return report;
}

}  // namespace consensus
