#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "consensus/gibbs.hpp"
#include "consensus/lvbc.hpp"
#include "consensus/panel.hpp"

namespace consensus {

/// Readings of one quantity keyed by instrument id.
using Readings = std::map<std::string, double>;

/// Per-quantity readings of a panel, keyed by quantity id.
std::map<std::string, Readings> readings_by_quantity(const ForecastPanel& panel);

inline constexpr double kMseFloor = 1e-8;

/// Inverse-MSE instrument weights, normalised to sum to one.
struct WeightVector {
  std::map<std::string, double> weights;
};

WeightVector fit_weights(const ForecastPanel& train);
double estimate_weighted(const Readings& readings, const WeightVector& weights);

struct AffineMap {
  double slope = 1.0;
  double intercept = 0.0;

  double operator()(double forecast) const noexcept { return slope * forecast + intercept; }
};

/// Per-instrument regression of actual on forecast, shrunk toward the identity map.
struct RidgeModel {
  std::map<std::string, AffineMap> coefficients;
  double ridge_strength = 0.0;
};

/// Solves, per instrument,
///   min_{a,b} sum_i (X_i - a Xhat_ij - b)^2 + ridge ((a - 1)^2 + b^2).
/// Instruments with fewer than two training pairs are left out of the model
/// (they fall back to the identity map at prediction time).
RidgeModel fit_ridge(const ForecastPanel& train, double ridge_strength);

double estimate_regression(const Readings& readings, const RidgeModel& model);

inline const std::vector<double> kDefaultRidgeGrid{1e-3, 1e-2, 1e-1, 1.0, 10.0};

/// Fits one ridge model per grid value and keeps the one with the lowest
/// validation RMSE (ties go to the earlier grid value).
RidgeModel select_ridge(const ForecastPanel& train, const ForecastPanel& valid,
                        std::span<const double> grid = kDefaultRidgeGrid);

/// Naive average per quantity.
std::map<std::string, double> estimate_naive_panel(const ForecastPanel& panel);
std::map<std::string, double> estimate_weighted_panel(const ForecastPanel& panel,
                                                      const WeightVector& weights);
std::map<std::string, double> estimate_regression_panel(const ForecastPanel& panel,
                                                        const RidgeModel& model);

struct BreResult {
  FitResult fit;
  std::map<std::string, double> estimates;
};

/// Single free calibration group (no pinning) learned exactly like LVBC,
/// followed by Gibbs inverse inference on the test panel.
BreResult estimate_bre(const ForecastPanel& train, const ForecastPanel& valid,
                       const ForecastPanel& test, const HyperParams& hyper, double lambda0,
                       const GibbsBudget& budget, std::uint64_t inference_seed);

}  // namespace consensus
