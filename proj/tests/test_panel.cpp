#include <gtest/gtest.h>

#include "consensus/error.hpp"
#include "consensus/panel.hpp"

namespace consensus {
namespace {

ForecastPanel small_panel() {
  ForecastPanel p;
  p.add_forecast("q1", "a", 1.0);
  p.add_forecast("q1", "b", 2.0);
  p.add_forecast("q2", "a", -1.0);
  p.set_actual("q1", 1.5);
  p.set_actual("q2", -0.5);
  return p;
}

TEST(ForecastPanel, InternsIdsInFirstSeenOrder) {
  const auto p = small_panel();
  EXPECT_EQ(p.num_entries(), 3u);
  EXPECT_EQ(p.num_quantities(), 2u);
  EXPECT_EQ(p.num_instruments(), 2u);
  EXPECT_EQ(p.quantity_ids(), (std::vector<std::string>{"q1", "q2"}));
  EXPECT_EQ(p.instrument_ids(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(p.find_instrument("b"), 1u);
  EXPECT_FALSE(p.find_quantity("nope").has_value());
}

TEST(ForecastPanel, DuplicateForecastConflicts) {
  auto p = small_panel();
  EXPECT_THROW(p.add_forecast("q1", "b", 3.0), ConflictError);
  EXPECT_EQ(p.num_entries(), 3u);
}

TEST(ForecastPanel, DuplicateActualConflicts) {
  auto p = small_panel();
  EXPECT_THROW(p.set_actual("q2", 4.0), ConflictError);
}

TEST(ForecastPanel, SignFlagsAndMissingActual) {
  auto p = small_panel();
  EXPECT_EQ(p.sign_flag(0), 1);
  EXPECT_EQ(p.sign_flag(1), 0);
  p.add_forecast("q3", "b", 0.2);
  EXPECT_FALSE(p.fully_labelled());
  EXPECT_THROW(p.sign_flag(2), InvalidInput);
  p.set_actual("q3", 0.0);
  EXPECT_EQ(p.sign_flag(2), 0);
  EXPECT_TRUE(p.fully_labelled());
}

TEST(ForecastPanel, ActualWithoutForecastsStillCounts) {
  ForecastPanel p;
  p.set_actual("lonely", 2.0);
  EXPECT_TRUE(p.empty());
  EXPECT_EQ(p.num_quantities(), 1u);
  EXPECT_TRUE(p.fully_labelled());
}

TEST(ForecastPanel, EntriesGroupedByQuantity) {
  const auto p = small_panel();
  const auto groups = p.entries_by_quantity();
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(groups[1], (std::vector<std::size_t>{2}));
}

TEST(ForecastPanel, WithoutActualsKeepsForecasts) {
  const auto p = small_panel();
  const auto stripped = p.without_actuals();
  EXPECT_EQ(stripped.num_entries(), p.num_entries());
  EXPECT_FALSE(stripped.has_actual(0));
  EXPECT_TRUE(stripped.actuals_by_id().empty());
  const auto actuals = p.actuals_by_id();
  EXPECT_EQ(actuals.at("q1"), 1.5);
  EXPECT_EQ(actuals.at("q2"), -0.5);
}

}  // namespace
}  // namespace consensus
