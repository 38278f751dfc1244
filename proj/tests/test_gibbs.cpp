#include <gtest/gtest.h>

#include <cmath>

#include "consensus/error.hpp"
#include "consensus/baselines.hpp"
#include "consensus/estimators.hpp"
#include "consensus/gibbs.hpp"
#include "consensus/stats.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace consensus {
namespace {

ForecastPanel unlabelled(const std::vector<double>& forecasts, const std::string& q = "q") {
  ForecastPanel p;
  for (std::size_t j = 0; j < forecasts.size(); ++j) {
    p.add_forecast(q, "i" + std::to_string(j), forecasts[j]);
  }
  return p;
}

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = "i" + std::to_string(j);
  return out;
}

TEST(ConditionalPosterior, SinglePinnedReading) {
  const auto p = LvbcParameters::identity(1, {"i0"});
  const std::vector<GroupedReading> r{{2.0, 0}};
  const auto post = conditional_posterior(r, p, 1, 0.01);
  EXPECT_NEAR(post.mean, 2.0 / 1.01, 1e-15);
  EXPECT_NEAR(post.variance, 1.0 / 1.01, 1e-15);
}

TEST(ConditionalPosterior, PrecisionsAdd) {
  const auto p = LvbcParameters::identity(1, {"i0", "i1"});
  const std::vector<GroupedReading> r{{2.0, 0}, {2.0, 0}};
  const auto post = conditional_posterior(r, p, 0, 1e-12);
  EXPECT_NEAR(post.mean, 2.0, 1e-10);
  EXPECT_NEAR(post.variance, 0.5, 1e-10);
}

TEST(ConditionalPosterior, MatchesDenseLinearAlgebra) {
  const auto p = testing::random_parameters(3, names(5), true, 17);
  const std::vector<GroupedReading> r{{1.2, 0}, {-0.4, 1}, {2.5, 2}, {0.3, 1}, {0.9, 2}};
  for (int xi = 0; xi < 2; ++xi) {
    std::vector<double> f, a, b, s;
    for (const auto& g : r) {
      f.push_back(g.forecast);
      a.push_back(p.alpha[g.group][xi]);
      b.push_back(p.beta[g.group][xi]);
      s.push_back(p.sigma(g.group));
    }
    const auto oracle = testing::dense_posterior(f, a, b, s, 0.3);
    const auto post = conditional_posterior(r, p, xi, 0.3);
    EXPECT_NEAR(post.mean, oracle.mean, 1e-12);
    EXPECT_NEAR(post.variance, oracle.variance, 1e-12);
  }
}

TEST(ConditionalPosterior, VarianceShrinksWithEachReading) {
  const auto p = testing::random_parameters(2, names(1), false, 3);
  std::vector<GroupedReading> r;
  double previous = 1e300;
  for (int n = 0; n < 6; ++n) {
    r.push_back({0.5 * n, static_cast<std::size_t>(n % 2)});
    const double v = conditional_posterior(r, p, 1, 1e-4).variance;
    EXPECT_LT(v, previous);
    previous = v;
  }
}

TEST(ConditionalPosterior, ShrinkageLimits) {
  auto p = LvbcParameters::identity(2, {"i0"}, false);
  p.beta[1] = {0.4, 0.4};
  const std::vector<GroupedReading> r{{3.0, 1}};
  EXPECT_NEAR(conditional_posterior(r, p, 1, 1e12).mean, 0.0, 1e-10);
  EXPECT_NEAR(conditional_posterior(r, p, 1, 1e-12).mean, 2.6, 1e-10);
}

TEST(ConditionalPosterior, RejectsBadArguments) {
  const auto p = LvbcParameters::identity(1, {"i0"});
  EXPECT_THROW(conditional_posterior({}, p, 0, 1.0), InvalidInput);
  const std::vector<GroupedReading> r{{1.0, 0}};
  EXPECT_THROW(conditional_posterior(r, p, 0, 0.0), InvalidInput);
  const std::vector<GroupedReading> bad{{1.0, 4}};
  EXPECT_THROW(conditional_posterior(bad, p, 0, 1.0), InvalidInput);
}

TEST(Gibbs, PinnedOnlyChainMatchesBayesianEstimator) {
  const std::vector<double> forecasts{0.8, 1.7, 1.1, 2.3};
  const auto panel = unlabelled(forecasts);
  const auto p = LvbcParameters::identity(1, names(4));
  const double lambda0 = 0.5;
  const auto run = gibbs_run(panel, p, lambda0, {5000, 100, 0.95}, 9);
  const double expected =
      estimate_bayesian(LabelledSums{5.9, 0.0, 4, 0}, 1.0, 0.0, lambda0);
  const double se = std::sqrt(1.0 / (4.0 + lambda0) / static_cast<double>(run.chains[0].samples.size()));
  EXPECT_NEAR(run.chains[0].point_estimate, expected, 3.0 * se);
}

TEST(Gibbs, IdenticalReadingsWithTinyNoiseConcentrate) {
  const auto panel = unlabelled({1.25, 1.25, 1.25});
  const auto p = LvbcParameters::identity(1, names(3), true, 1e-4);
  const auto run = gibbs_run(panel, p, 1e-4, {500, 50, 0.95}, 2);
  EXPECT_NEAR(run.chains[0].point_estimate, 1.25, 1e-3);
  EXPECT_LE(run.chains[0].ci_low, run.chains[0].point_estimate);
  EXPECT_GE(run.chains[0].ci_high, run.chains[0].point_estimate);
}

TEST(Gibbs, BitIdenticalForFixedSeed) {
  const auto d = testing::recovery_data(3, 10, 10, 20);
  const auto p = testing::random_parameters(2, d.test.instrument_ids(), true, 4);
  const auto a = gibbs_run(d.test, p, 1e-4, {300, 30, 0.9}, 77);
  const auto b = gibbs_run(d.test, p, 1e-4, {300, 30, 0.9}, 77);
  ASSERT_EQ(a.chains.size(), b.chains.size());
  for (std::size_t i = 0; i < a.chains.size(); ++i) {
    EXPECT_EQ(a.chains[i].samples, b.chains[i].samples);
    EXPECT_EQ(a.chains[i].ci_low, b.chains[i].ci_low);
    EXPECT_EQ(a.chains[i].ci_high, b.chains[i].ci_high);
  }
  EXPECT_EQ(a.chains[0].samples.size(), 270u);
}

TEST(Gibbs, ActualsAreIgnored) {
  const auto d = testing::recovery_data(3, 10, 10, 20);
  const auto p = testing::random_parameters(2, d.test.instrument_ids(), true, 4);
  const auto with = infer_point_estimates(d.test, p, 1e-4, {200, 20, 0.95}, 1);
  const auto without = infer_point_estimates(d.test.without_actuals(), p, 1e-4, {200, 20, 0.95}, 1);
  EXPECT_EQ(with, without);
}

TEST(Gibbs, WrapperReturnsChainPointEstimates) {
  const auto d = testing::recovery_data(4, 10, 10, 15);
  const auto p = testing::random_parameters(2, d.test.instrument_ids(), true, 5);
  const GibbsBudget budget{200, 20, 0.95};
  const auto run = gibbs_run(d.test, p, 1e-4, budget, 8);
  const auto map = infer_point_estimates(d.test, p, 1e-4, budget, 8);
  ASSERT_EQ(map.size(), run.chains.size());
  for (const auto& c : run.chains) EXPECT_EQ(map.at(c.quantity_id), c.point_estimate);
  EXPECT_TRUE(infer_point_estimates(ForecastPanel{}, p, 1e-4, budget, 8).empty());
}

TEST(Gibbs, QuantitiesWithoutReadingsAreExcluded) {
  auto panel = unlabelled({1.0, 2.0});
  panel.set_actual("lonely", 3.0);
  const auto p = LvbcParameters::identity(1, names(2));
  const auto run = gibbs_run(panel, p, 1e-4, {100, 10, 0.95}, 1);
  EXPECT_EQ(run.excluded, std::vector<std::string>{"lonely"});
  EXPECT_EQ(run.chains.size(), 1u);
  EXPECT_EQ(run.find("lonely"), nullptr);
}

TEST(Gibbs, RejectsBadBudget) {
  const auto panel = unlabelled({1.0});
  const auto p = LvbcParameters::identity(1, names(1));
  EXPECT_THROW(gibbs_run(panel, p, 1e-4, {10, 10, 0.95}, 1), InvalidInput);
  EXPECT_THROW(gibbs_run(panel, p, 1e-4, {10, 1, 1.0}, 1), InvalidInput);
  EXPECT_THROW(gibbs_run(panel, p, 0.0, {10, 1, 0.9}, 1), InvalidInput);
}

TEST(Gibbs, ErgodicMeanMatchesEnumeratedMixture) {
  auto p = testing::random_parameters(2, names(6), true, 12);
  p.alpha[1] = {0.6, 1.4};
  p.beta[1] = {-0.5, 0.3};
  const std::vector<double> forecasts{0.4, -0.2, 0.9, 0.1, -0.6, 0.3};
  const auto panel = unlabelled(forecasts);
  std::vector<std::pair<std::size_t, double>> readings;
  for (std::size_t j = 0; j < forecasts.size(); ++j) readings.emplace_back(j, forecasts[j]);
  const double oracle = testing::enumerated_chain_mean(readings, p, 0.1);

  const auto run = gibbs_run(panel, p, 0.1, {5100, 100, 0.95}, 31);
  const auto& s = run.chains[0].samples;
  const double se = testing::batch_means_se(s, 25);
  EXPECT_NEAR(stats::mean(s), oracle, 3.0 * se);
}

TEST(Gibbs, TwoGroupInferenceBeatsPlainAverage) {
  const auto d = testing::recovery_data(21, 10, 10, 300);
  // Generator parameters, with logits strongly favouring each true group.
  auto p = LvbcParameters::identity(2, d.test.instrument_ids(), true, 1.0);
  p.alpha[1] = {0.7, 0.7};
  p.beta[1] = {-0.3, -0.3};
  p.log_sigma[1] = std::log(0.5);
  for (std::size_t j = 0; j < p.num_instruments(); ++j) {
    const int g = d.groups.at(std::stoul(p.instruments[j].substr(4)));
    p.logit(j, static_cast<std::size_t>(g)) = 6.0;
  }
  const auto inferred = infer_point_estimates(d.test, p, 1e-4, {1000, 100, 0.95}, 5);
  const auto naive = estimate_naive_panel(d.test);
  double sse_inferred = 0.0, sse_naive = 0.0;
  for (const auto& [id, x] : d.test.actuals_by_id()) {
    sse_inferred += std::pow(inferred.at(id) - x, 2);
    sse_naive += std::pow(naive.at(id) - x, 2);
  }
  EXPECT_LT(sse_inferred, sse_naive);
}

}  // namespace
}  // namespace consensus
