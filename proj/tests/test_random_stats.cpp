#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "consensus/error.hpp"
#include "consensus/random.hpp"
#include "consensus/stats.hpp"

namespace consensus {
namespace {

TEST(DeriveStreamSeed, IsDeterministic) {
  EXPECT_EQ(derive_stream_seed(42, 3, 10), derive_stream_seed(42, 3, 10));
}

TEST(DeriveStreamSeed, SeparatesRealizationsAndInstrumentCounts) {
  EXPECT_NE(derive_stream_seed(42, 0, 10), derive_stream_seed(42, 1, 10));
  EXPECT_NE(derive_stream_seed(42, 0, 10), derive_stream_seed(42, 0, 25));
  EXPECT_NE(derive_stream_seed(42, 0, 10), derive_stream_seed(43, 0, 10));
}

TEST(DeriveStreamSeed, NoCollisionsOnSweepGrid) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ULL, 1ULL, 42ULL}) {
    for (std::uint64_t r = 0; r < 1000; ++r) {
      for (std::uint64_t a : {10ULL, 25ULL, 50ULL, 100ULL, 200ULL}) {
        seen.insert(derive_stream_seed(master, r, a));
      }
    }
  }
  EXPECT_EQ(seen.size(), 3u * 1000u * 5u);
}

TEST(DeriveStreamSeed, MakeStreamMatchesExplicitSeed) {
  Rng a = make_stream(7, 1, 2);
  Rng b(derive_stream_seed(7, 1, 2));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(a(), b());
}

TEST(Stats, MeanAndVariance) {
  const std::vector<double> xs{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  EXPECT_DOUBLE_EQ(stats::mean(xs), 5.0);
  EXPECT_DOUBLE_EQ(stats::sample_variance(xs), 32.0 / 7.0);
  EXPECT_DOUBLE_EQ(stats::standard_error(xs), std::sqrt(32.0 / 7.0 / 8.0));
  EXPECT_THROW(stats::mean(std::vector<double>{}), InvalidInput);
}

TEST(Stats, QuantileMatchesLinearInterpolationDefinition) {
  // Reference values from numpy.quantile (default "linear" method).
  const std::vector<double> xs{3.0, 1.0, 4.0, 1.5, 9.0, 2.6};
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 0.1), 1.25);
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 0.25), 1.775);
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 0.5), 2.8);
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 0.9), 6.5);
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 1.0), 9.0);
}

}  // namespace
}  // namespace consensus
