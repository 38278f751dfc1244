#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "consensus/estimators.hpp"
#include "consensus/panel.hpp"

namespace consensus {

/// Two-class synthetic world: truths ~ Uniform[-5, 5), each (quantity,
/// instrument) reading is miscalibrated with probability delta.
struct SyntheticConfig {
  double delta = 0.5;
  double alpha = 0.8;
  double beta = -0.2;
  double sigma2 = 1.0;
  double sigma_star2 = 1.5;
  std::size_t num_quantities = 1000;
  std::vector<std::size_t> instrument_counts{10, 25, 50, 100, 200};
  std::size_t num_realizations = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr double kTruthLow = -5.0;
inline constexpr double kTruthHigh = 5.0;

struct Realization {
  std::size_t num_quantities = 0;
  std::size_t num_instruments = 0;
  std::vector<double> truths;            // [num_quantities]
  std::vector<double> readings;          // row-major [num_quantities x num_instruments]
  std::vector<std::uint8_t> labels;      // same layout; 1 = miscalibrated

  double reading(std::size_t i, std::size_t j) const {
    return readings[i * num_instruments + j];
  }
  std::uint8_t label(std::size_t i, std::size_t j) const {
    return labels[i * num_instruments + j];
  }
  /// Sufficient statistics of row i under its true labels.
  LabelledSums row_sums(std::size_t i) const;
};

Realization generate_realization(const SyntheticConfig& config, std::size_t instrument_count,
                                 std::uint64_t stream_seed);

struct SweepRow {
  std::size_t instrument_count = 0;
  EstimatorKind kind = EstimatorKind::kNaive;
  double mean_rmse = 0.0;
  double stderr_rmse = 0.0;
  /// Quantity-realisations dropped because no good reading existed (CE only).
  std::size_t excluded = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  const SweepRow& at(std::size_t instrument_count, EstimatorKind kind) const;
};

struct SweepOptions {
  double lambda0 = kWeakPriorPrecision;
  unsigned threads = 1;
};

/// For every instrument count, draws num_realizations independent
/// realisations (all estimators see the same data), scores each estimator by
/// its per-realisation RMSE over quantities, and reports the mean RMSE and its
/// standard error across realisations. Oracle estimators get the true labels
/// and the true alpha and beta.
SweepResult run_sweep(const SyntheticConfig& config, std::span<const EstimatorKind> kinds,
                      const SweepOptions& options = {});

// ---------------------------------------------------------------------------
// Latent-group forecast world, used to produce panels for the LVBC pipeline.

struct GroupSpec {
  std::array<double, 2> alpha{1.0, 1.0};  // indexed by sign branch (X <= 0, X > 0)
  std::array<double, 2> beta{0.0, 0.0};
  double sigma = 1.0;
  double weight = 1.0;  // relative share of instruments
};

struct LvbcWorld {
  std::vector<GroupSpec> groups;
  std::size_t num_instruments = 50;
  double coverage = 1.0;  // probability that an instrument covers a quantity
};

/// Instrument ids are "inst0000", "inst0001", ...
std::string instrument_name(std::size_t j);

/// z_j ~ Discrete(weights), drawn from the given seed.
std::vector<int> assign_instrument_groups(const LvbcWorld& world, std::uint64_t seed);

/// Forwards model: X_i ~ Uniform[-5, 5), xi_i = 1{X_i > 0},
/// Xhat_ij ~ N(alpha_{z_j, xi_i} X_i + beta_{z_j, xi_i}, sigma_{z_j}^2).
/// Every quantity gets at least one forecast.
ForecastPanel generate_lvbc_panel(const LvbcWorld& world, std::span<const int> groups,
                                  std::size_t num_quantities, std::uint64_t seed,
                                  std::string_view quantity_prefix);

}  // namespace consensus
