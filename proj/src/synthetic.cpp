#include "consensus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "consensus/error.hpp"
#include "consensus/log.hpp"
#include "consensus/random.hpp"
#include "consensus/stats.hpp"

namespace consensus {

void SyntheticConfig::validate() const {
  // Closed bounds on delta and zero variances are accepted so that the
  // degenerate worlds (all good, all bad, noise free) stay expressible.
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in [0, 1]");
  if (!(sigma2 >= 0.0) || !(sigma_star2 >= 0.0)) {
    throw InvalidInput("variances must be non-negative");
  }
  if (num_quantities == 0) throw InvalidInput("num_quantities must be positive");
  if (num_realizations == 0) throw InvalidInput("num_realizations must be positive");
  if (instrument_counts.empty()) throw InvalidInput("instrument_counts is empty");
  for (auto a : instrument_counts) {
    if (a < 2) throw InvalidInput("every instrument count must be >= 2");
  }
}

LabelledSums Realization::row_sums(std::size_t i) const {
  LabelledSums s;
  const double* row = readings.data() + i * num_instruments;
  const std::uint8_t* z = labels.data() + i * num_instruments;
  for (std::size_t j = 0; j < num_instruments; ++j) {
    if (z[j]) {
      s.bad_sum += row[j];
      ++s.bad_count;
    } else {
      s.good_sum += row[j];
      ++s.good_count;
    }
  }
  return s;
}

Realization generate_realization(const SyntheticConfig& config, std::size_t instrument_count,
                                 std::uint64_t stream_seed) {
  config.validate();
  if (instrument_count < 2) throw InvalidInput("instrument_count must be >= 2");

  Rng rng(stream_seed);
  std::uniform_real_distribution<double> truth_dist(kTruthLow, kTruthHigh);
  std::bernoulli_distribution label_dist(config.delta);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sd_good = std::sqrt(config.sigma2);
  const double sd_bad = std::sqrt(config.sigma_star2);

  Realization r;
  r.num_quantities = config.num_quantities;
  r.num_instruments = instrument_count;
  r.truths.resize(r.num_quantities);
  r.readings.resize(r.num_quantities * instrument_count);
  r.labels.resize(r.num_quantities * instrument_count);

  for (std::size_t i = 0; i < r.num_quantities; ++i) {
    const double x = truth_dist(rng);
    r.truths[i] = x;
    for (std::size_t j = 0; j < instrument_count; ++j) {
      const std::size_t k = i * instrument_count + j;
      const bool bad = label_dist(rng);
      r.labels[k] = bad ? 1 : 0;
      r.readings[k] = bad ? config.alpha * x + config.beta + sd_bad * noise(rng)
                          : x + sd_good * noise(rng);
    }
  }
  return r;
}

const SweepRow& SweepResult::at(std::size_t instrument_count, EstimatorKind kind) const {
  for (const auto& row : rows) {
    if (row.instrument_count == instrument_count && row.kind == kind) return row;
  }
  throw InvalidInput("no sweep row for A=" + std::to_string(instrument_count) + " kind " +
                     std::string(to_string(kind)));
}

namespace {

struct RealizationScore {
  std::vector<double> rmse;        // per kind; NaN when undefined
  std::vector<std::size_t> excluded;
};

RealizationScore score_realization(const SyntheticConfig& config,
                                   std::span<const EstimatorKind> kinds,
                                   std::size_t instrument_count, std::size_t index,
                                   double lambda0) {
  const Realization r =
      generate_realization(config, instrument_count,
                           derive_stream_seed(config.seed, index, instrument_count));
  std::vector<double> sse(kinds.size(), 0.0);
  std::vector<std::size_t> used(kinds.size(), 0);
  RealizationScore out{std::vector<double>(kinds.size()),
                       std::vector<std::size_t>(kinds.size(), 0)};

  for (std::size_t i = 0; i < r.num_quantities; ++i) {
    const LabelledSums s = r.row_sums(i);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      if (kinds[k] == EstimatorKind::kConservative && s.good_count == 0) {
        ++out.excluded[k];
        continue;
      }
      const double err = estimate(kinds[k], s, config.alpha, config.beta, lambda0) - r.truths[i];
      sse[k] += err * err;
      ++used[k];
    }
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    out.rmse[k] = used[k] ? std::sqrt(sse[k] / static_cast<double>(used[k])) : std::nan("");
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const SyntheticConfig& config, std::span<const EstimatorKind> kinds,
                      const SweepOptions& options) {
  config.validate();
  if (kinds.empty()) throw InvalidInput("no estimator kinds requested");
  if (!(options.lambda0 > 0.0)) throw InvalidInput("lambda0 must be positive");

  SweepResult result;
  const unsigned threads = std::max(1u, options.threads);

  for (std::size_t a : config.instrument_counts) {
    std::vector<RealizationScore> scores(config.num_realizations);
    auto work = [&](unsigned worker) {
      for (std::size_t r = worker; r < config.num_realizations; r += threads) {
        scores[r] = score_realization(config, kinds, a, r, options.lambda0);
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }

    for (std::size_t k = 0; k < kinds.size(); ++k) {
      std::vector<double> per_realization;
      per_realization.reserve(scores.size());
      std::size_t excluded = 0;
      for (const auto& s : scores) {
        excluded += s.excluded[k];
        if (!std::isnan(s.rmse[k])) per_realization.push_back(s.rmse[k]);
      }
      if (per_realization.empty()) {
        throw DegenerateInput("estimator " + std::string(to_string(kinds[k])) +
                              " had no usable quantity at A=" + std::to_string(a));
      }
      if (excluded > 0) {
        warn(std::string(to_string(kinds[k])) + " skipped " + std::to_string(excluded) +
             " quantity-realisations with no good reading at A=" + std::to_string(a));
      }
      result.rows.push_back({a, kinds[k], stats::mean(per_realization),
                             stats::standard_error(per_realization), excluded});
    }
    info("sweep: finished A=" + std::to_string(a));
  }
  return result;
}

std::string instrument_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "inst%04zu", j);
  return buf;
}

std::vector<int> assign_instrument_groups(const LvbcWorld& world, std::uint64_t seed) {
  if (world.groups.empty()) throw InvalidInput("world has no groups");
  std::vector<double> weights;
  for (const auto& g : world.groups) {
    if (!(g.weight >= 0.0)) throw InvalidInput("group weights must be non-negative");
    weights.push_back(g.weight);
  }
  Rng rng(seed);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<int> groups(world.num_instruments);
  for (auto& z : groups) z = pick(rng);
  return groups;
}

ForecastPanel generate_lvbc_panel(const LvbcWorld& world, std::span<const int> groups,
                                  std::size_t num_quantities, std::uint64_t seed,
                                  std::string_view quantity_prefix) {
  if (groups.size() != world.num_instruments) {
    throw InvalidInput("group assignment size does not match instrument count");
  }
  if (world.num_instruments == 0) throw InvalidInput("world has no instruments");
  if (!(world.coverage > 0.0 && world.coverage <= 1.0)) {
    throw InvalidInput("coverage must lie in (0, 1]");
  }
  for (int z : groups) {
    if (z < 0 || static_cast<std::size_t>(z) >= world.groups.size()) {
      throw InvalidInput("group index out of range");
    }
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> truth_dist(kTruthLow, kTruthHigh);
  std::bernoulli_distribution covers(world.coverage);
  std::uniform_int_distribution<std::size_t> any_instrument(0, world.num_instruments - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<std::string> names(world.num_instruments);
  for (std::size_t j = 0; j < names.size(); ++j) names[j] = instrument_name(j);

  ForecastPanel panel;
  std::vector<char> covered(world.num_instruments);
  for (std::size_t i = 0; i < num_quantities; ++i) {
    const std::string qid = std::string(quantity_prefix) + std::to_string(i);
    const double x = truth_dist(rng);
    const int xi = x > 0.0 ? 1 : 0;
    bool any = false;
    for (std::size_t j = 0; j < world.num_instruments; ++j) {
      covered[j] = world.coverage >= 1.0 || covers(rng);
      any = any || covered[j];
    }
    if (!any) covered[any_instrument(rng)] = 1;
    for (std::size_t j = 0; j < world.num_instruments; ++j) {
      if (!covered[j]) continue;
      const GroupSpec& g = world.groups[static_cast<std::size_t>(groups[j])];
      panel.add_forecast(qid, names[j], g.alpha[xi] * x + g.beta[xi] + g.sigma * noise(rng));
    }
    panel.set_actual(qid, x);
  }
  return panel;
}

}  // namespace consensus
