#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "consensus/error.hpp"
#include "consensus/metrics.hpp"

namespace consensus {
namespace {

ValueMap values(std::initializer_list<double> xs) {
  ValueMap out;
  int i = 0;
  for (double x : xs) out["q" + std::to_string(i++)] = x;
  return out;
}

// n i.i.d. standard normal errors around spread-out actuals.
std::pair<ValueMap, ValueMap> noisy_pairs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> e(0.0, 1.0);
  ValueMap pred, act;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "q" + std::to_string(i);
    const double x = static_cast<double>(i % 17) - 8.0;
    act[id] = x;
    pred[id] = x + e(rng);
  }
  return {pred, act};
}

TEST(Score, Examples) {
  const auto exact = score(values({1, 2, 4}), values({1, 2, 4}));
  EXPECT_EQ(exact.micro.rmse, 0.0);
  EXPECT_EQ(exact.micro.mae, 0.0);
  EXPECT_EQ(exact.micro.r2, 1.0);
  EXPECT_FALSE(exact.macro.has_value());

  const auto m = score(values({1, 2}), values({3, 2}));
  EXPECT_DOUBLE_EQ(m.micro.rmse, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(m.micro.mae, 1.0);

  EXPECT_NEAR(score(values({2, 2, 2}), values({1, 2, 3})).micro.r2, 0.0, 1e-15);
}

TEST(Score, Errors) {
  EXPECT_THROW(score(values({1, 2}), values({1})), InvalidInput);
  ValueMap other{{"q0", 1.0}, {"zz", 2.0}};
  EXPECT_THROW(score(values({1, 2}), other), InvalidInput);
  EXPECT_THROW(score({}, {}), InvalidInput);
  EXPECT_THROW(score(values({1, 2}), values({5, 5})), UndefinedMetric);
}

TEST(Score, MacroAveragesGroups) {
  const auto pred = values({1, 1, 0, 0});
  const auto act = values({0, 2, 0, 3});
  const GroupMap groups{{"q0", "a"}, {"q1", "a"}, {"q2", "b"}, {"q3", "b"}};
  const auto m = score(pred, act, &groups);
  ASSERT_TRUE(m.macro.has_value());
  // Group a: rmse 1, mae 1. Group b: rmse sqrt(4.5), mae 1.5.
  EXPECT_DOUBLE_EQ(m.macro->rmse, 0.5 * (1.0 + std::sqrt(4.5)));
  EXPECT_DOUBLE_EQ(m.macro->mae, 1.25);
  EXPECT_TRUE(std::isnan(m.macro->r2));
  const GroupMap partial{{"q0", "a"}};
  EXPECT_THROW(score(pred, act, &partial), InvalidInput);
}

TEST(Score, RmseAtLeastMaeAndPermutationInvariant) {
  const auto [pred, act] = noisy_pairs(200, 4);
  const auto m = score(pred, act);
  EXPECT_GE(m.micro.rmse, m.micro.mae);
  // Relabel keys so that map ordering changes.
  ValueMap p2, a2;
  for (const auto& [id, v] : pred) p2["z" + std::to_string(1000 - std::stoi(id.substr(1)))] = v;
  for (const auto& [id, v] : act) a2["z" + std::to_string(1000 - std::stoi(id.substr(1)))] = v;
  const auto m2 = score(p2, a2);
  EXPECT_NEAR(m2.micro.rmse, m.micro.rmse, 1e-12);
  EXPECT_NEAR(m2.micro.mae, m.micro.mae, 1e-12);
  EXPECT_NEAR(m2.micro.r2, m.micro.r2, 1e-12);
}

TEST(Bootstrap, ZeroErrorGivesDegenerateIntervals) {
  const auto act = values({1, 2, 3, 4, 5});
  const auto r = bootstrap_report(act, act, nullptr, 200, 0.95, 1);
  EXPECT_EQ(r.micro.rmse.ci_low, 0.0);
  EXPECT_EQ(r.micro.rmse.ci_high, 0.0);
  EXPECT_EQ(r.micro.mae.ci_low, 0.0);
  EXPECT_EQ(r.micro.mae.ci_high, 0.0);
}

TEST(Bootstrap, BitIdenticalForFixedSeed) {
  const auto [pred, act] = noisy_pairs(100, 5);
  const auto a = bootstrap_report(pred, act, nullptr, 300, 0.9, 12);
  const auto b = bootstrap_report(pred, act, nullptr, 300, 0.9, 12);
  EXPECT_EQ(a.micro.rmse.ci_low, b.micro.rmse.ci_low);
  EXPECT_EQ(a.micro.rmse.ci_high, b.micro.rmse.ci_high);
  EXPECT_EQ(a.micro.mae.ci_high, b.micro.mae.ci_high);
  EXPECT_EQ(a.micro.r2->ci_low, b.micro.r2->ci_low);
}

TEST(Bootstrap, PointValuesEqualScore) {
  const auto [pred, act] = noisy_pairs(150, 6);
  GroupMap groups;
  for (const auto& [id, v] : act) groups[id] = std::stoi(id.substr(1)) % 3 ? "x" : "y";
  const auto s = score(pred, act, &groups);
  const auto r = bootstrap_report(pred, act, &groups, 100, 0.95, 3);
  EXPECT_EQ(r.micro.rmse.point, s.micro.rmse);
  EXPECT_EQ(r.micro.mae.point, s.micro.mae);
  EXPECT_EQ(r.micro.r2->point, s.micro.r2);
  ASSERT_TRUE(r.macro.has_value());
  EXPECT_EQ(r.macro->rmse.point, s.macro->rmse);
  EXPECT_FALSE(r.macro->r2.has_value());
  EXPECT_LE(r.macro->rmse.ci_low, r.macro->rmse.point);
  EXPECT_GE(r.macro->rmse.ci_high, r.macro->rmse.point);
}

TEST(Bootstrap, RmseHalfWidthFollowsChiSquareAsymptotics) {
  const auto [pred, act] = noisy_pairs(1000, 7);
  const auto r = bootstrap_report(pred, act, nullptr, 1000, 0.95, 8);
  const double half = 0.5 * (r.micro.rmse.ci_high - r.micro.rmse.ci_low);
  const double expected = 1.96 / std::sqrt(2.0 * 1000.0);
  EXPECT_NEAR(half, expected, 0.3 * expected);
}

TEST(Bootstrap, WiderLevelGivesWiderIntervals) {
  const auto [pred, act] = noisy_pairs(120, 9);
  double previous = 0.0;
  for (double level : {0.5, 0.8, 0.9, 0.99}) {
    const auto r = bootstrap_report(pred, act, nullptr, 500, level, 10);
    const double width = r.micro.rmse.ci_high - r.micro.rmse.ci_low;
    EXPECT_GE(width, previous);
    previous = width;
  }
}

TEST(Bootstrap, RejectsBadArguments) {
  const auto [pred, act] = noisy_pairs(20, 1);
  EXPECT_THROW(bootstrap_report(pred, act, nullptr, 99, 0.95, 1), InvalidInput);
  EXPECT_THROW(bootstrap_report(pred, act, nullptr, 100, 1.0, 1), InvalidInput);
}

}  // namespace
}  // namespace consensus
