#include "consensus/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "consensus/error.hpp"
#include "consensus/log.hpp"
#include "consensus/random.hpp"
#include "consensus/stats.hpp"

namespace consensus {

ConditionalPosterior conditional_posterior(std::span<const GroupedReading> readings,
                                           const LvbcParameters& params, int xi, double lambda0) {
  if (readings.empty()) throw InvalidInput("conditional posterior needs at least one reading");
  if (!(lambda0 > 0.0)) throw InvalidInput("lambda0 must be positive");
  if (xi != 0 && xi != 1) throw InvalidInput("sign branch must be 0 or 1");
  double precision = lambda0;
  double weighted = 0.0;
  for (const auto& r : readings) {
    if (r.group >= params.num_groups) throw InvalidInput("group index out of range");
    const double a = params.alpha[r.group][static_cast<std::size_t>(xi)];
    const double b = params.beta[r.group][static_cast<std::size_t>(xi)];
    const double inv_var = std::exp(-2.0 * params.log_sigma[r.group]);
    precision += a * a * inv_var;
    weighted += a * (r.forecast - b) * inv_var;
  }
  return {weighted / precision, 1.0 / precision};
}

const ChainOutput* GibbsResult::find(const std::string& quantity_id) const {
  for (const auto& c : chains) {
    if (c.quantity_id == quantity_id) return &c;
  }
  return nullptr;
}

GibbsResult gibbs_run(const ForecastPanel& panel, const LvbcParameters& params, double lambda0,
                      const GibbsBudget& budget, std::uint64_t seed) {
  params.validate();
  if (!(lambda0 > 0.0)) throw InvalidInput("lambda0 must be positive");
  if (budget.num_samples <= budget.burn_in) {
    throw InvalidInput("num_samples must exceed burn_in");
  }
  if (!(budget.credible_level > 0.0 && budget.credible_level < 1.0)) {
    throw InvalidInput("credible_level must lie in (0, 1)");
  }
  const std::size_t K = params.num_groups;

  // Cumulative group probabilities per panel instrument.
  std::unordered_map<std::string, std::size_t> rows;
  for (std::size_t j = 0; j < params.instruments.size(); ++j) rows.emplace(params.instruments[j], j);
  const std::size_t A = panel.num_instruments();
  std::vector<double> cdf(A * K);
  std::size_t unknown = 0;
  for (std::size_t j = 0; j < A; ++j) {
    std::vector<double> p(K, 1.0 / static_cast<double>(K));
    if (auto it = rows.find(panel.instrument_ids()[j]); it != rows.end()) {
      p = params.group_probabilities(it->second);
    } else {
      ++unknown;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) cdf[j * K + k] = (acc += p[k]);
  }
  if (unknown > 0) {
    warn(std::to_string(unknown) + " instrument(s) have no learned group weights; using uniform");
  }

  // Per-quantity reading lists.
  GibbsResult result;
  std::vector<std::size_t> active;
  std::vector<std::vector<std::pair<std::size_t, double>>> readings;
  const auto by_quantity = panel.entries_by_quantity();
  for (std::size_t q = 0; q < panel.num_quantities(); ++q) {
    if (by_quantity[q].empty()) {
      result.excluded.push_back(panel.quantity_ids()[q]);
      continue;
    }
    active.push_back(q);
    auto& list = readings.emplace_back();
    for (auto e : by_quantity[q]) {
      const auto& entry = panel.entries()[e];
      list.emplace_back(entry.instrument, entry.forecast);
    }
  }
  if (!result.excluded.empty()) {
    warn(std::to_string(result.excluded.size()) + " quantity(ies) without readings excluded");
  }

  const std::size_t Q = active.size();
  std::vector<double> x(Q);
  std::vector<int> xi(Q);
  for (std::size_t i = 0; i < Q; ++i) {
    double s = 0.0;
    for (const auto& [j, f] : readings[i]) s += f;
    x[i] = s / static_cast<double>(readings[i].size());
    xi[i] = x[i] > 0.0 ? 1 : 0;
  }

  const std::size_t keep = budget.num_samples - budget.burn_in;
  result.chains.resize(Q);
  for (std::size_t i = 0; i < Q; ++i) {
    result.chains[i].quantity_id = panel.quantity_ids()[active[i]];
    result.chains[i].samples.reserve(keep);
  }

  std::vector<double> inv_var(K);
  for (std::size_t k = 0; k < K; ++k) inv_var[k] = std::exp(-2.0 * params.log_sigma[k]);

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> z(A);

  for (std::size_t n = 1; n <= budget.num_samples; ++n) {
    for (std::size_t j = 0; j < A; ++j) {
      const double u = unit(rng);
      const double* c = cdf.data() + j * K;
      std::size_t k = 0;
      while (k + 1 < K && u >= c[k]) ++k;
      z[j] = k;
    }
    for (std::size_t i = 0; i < Q; ++i) {
      const auto b = static_cast<std::size_t>(xi[i]);
      double precision = lambda0;
      double weighted = 0.0;
      for (const auto& [j, f] : readings[i]) {
        const std::size_t k = z[j];
        const double a = params.alpha[k][b];
        precision += a * a * inv_var[k];
        weighted += a * (f - params.beta[k][b]) * inv_var[k];
      }
      x[i] = weighted / precision + normal(rng) / std::sqrt(precision);
      xi[i] = x[i] > 0.0 ? 1 : 0;
      if (n > budget.burn_in) result.chains[i].samples.push_back(x[i]);
    }
  }

  const double tail = 0.5 * (1.0 - budget.credible_level);
  for (auto& chain : result.chains) {
    chain.point_estimate = stats::mean(chain.samples);
    std::vector<double> sorted = chain.samples;
    std::sort(sorted.begin(), sorted.end());
    chain.ci_low = std::min(stats::quantile_sorted(sorted, tail), chain.point_estimate);
    chain.ci_high = std::max(stats::quantile_sorted(sorted, 1.0 - tail), chain.point_estimate);
  }
  return result;
}

std::map<std::string, double> infer_point_estimates(const ForecastPanel& panel,
                                                    const LvbcParameters& params,
                                                    double lambda0, const GibbsBudget& budget,
                                                    std::uint64_t seed) {
  std::map<std::string, double> out;
  for (const auto& chain : gibbs_run(panel, params, lambda0, budget, seed).chains) {
    out.emplace(chain.quantity_id, chain.point_estimate);
  }
  return out;
}

}  // namespace consensus
