#include "consensus/baselines.hpp"

#include <cmath>
#include <limits>

#include "consensus/error.hpp"
#include "consensus/log.hpp"

namespace consensus {

std::map<std::string, Readings> readings_by_quantity(const ForecastPanel& panel) {
  std::map<std::string, Readings> out;
  for (const auto& e : panel.entries()) {
    out[panel.quantity_ids()[e.quantity]][panel.instrument_ids()[e.instrument]] = e.forecast;
  }
  return out;
}

WeightVector fit_weights(const ForecastPanel& train) {
  std::vector<double> sse(train.num_instruments(), 0.0);
  std::vector<std::size_t> count(train.num_instruments(), 0);
  for (const auto& e : train.entries()) {
    const auto& actual = train.actual(e.quantity);
    if (!actual) continue;
    const double err = e.forecast - *actual;
    sse[e.instrument] += err * err;
    ++count[e.instrument];
  }

  std::vector<double> raw(train.num_instruments(), 0.0);
  double known_total = 0.0;
  std::size_t known = 0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (count[j] == 0) continue;
    const double mse = std::max(sse[j] / static_cast<double>(count[j]), kMseFloor);
    raw[j] = 1.0 / mse;
    known_total += raw[j];
    ++known;
  }
  if (known == 0) throw InvalidInput("no instrument has a training history");
  const double fallback = known_total / static_cast<double>(known);
  double total = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (count[j] == 0) {
      warn("instrument '" + train.instrument_ids()[j] + "' has no history; using mean weight");
      raw[j] = fallback;
    }
    total += raw[j];
  }
  WeightVector w;
  for (std::size_t j = 0; j < raw.size(); ++j) w.weights[train.instrument_ids()[j]] = raw[j] / total;
  return w;
}

double estimate_weighted(const Readings& readings, const WeightVector& weights) {
  if (readings.empty()) throw InvalidInput("no readings to combine");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [id, value] : readings) {
    auto it = weights.weights.find(id);
    if (it == weights.weights.end()) throw InvalidInput("instrument '" + id + "' has no weight");
    num += it->second * value;
    den += it->second;
  }
  if (!(den > 0.0)) throw DegenerateInput("present instruments carry zero total weight");
  return num / den;
}

RidgeModel fit_ridge(const ForecastPanel& train, double ridge_strength) {
  if (!(ridge_strength >= 0.0)) throw InvalidInput("ridge_strength must be non-negative");
  struct Moments {
    double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  };
  std::vector<Moments> mom(train.num_instruments());
  for (const auto& e : train.entries()) {
    const auto& actual = train.actual(e.quantity);
    if (!actual) continue;
    auto& m = mom[e.instrument];
    m.n += 1;
    m.sx += e.forecast;
    m.sxx += e.forecast * e.forecast;
    m.sy += *actual;
    m.sxy += e.forecast * *actual;
  }

  RidgeModel model;
  model.ridge_strength = ridge_strength;
  for (std::size_t j = 0; j < mom.size(); ++j) {
    const auto& m = mom[j];
    const auto& id = train.instrument_ids()[j];
    if (m.n < 2) {
      warn("instrument '" + id + "' has fewer than two training pairs; identity map used");
      continue;
    }
    // [sxx + r, sx; sx, n + r] [a; b] = [sxy + r; sy]
    const double a11 = m.sxx + ridge_strength;
    const double a12 = m.sx;
    const double a22 = m.n + ridge_strength;
    const double det = a11 * a22 - a12 * a12;
    const double scale = a11 * a22;
    if (!(std::abs(det) > 1e-12 * scale) || !std::isfinite(det)) {
      throw SingularFit("ridge design for instrument '" + id + "' is singular");
    }
    const double r1 = m.sxy + ridge_strength;
    const double r2 = m.sy;
    AffineMap f{(r1 * a22 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det};
    if (!std::isfinite(f.slope) || !std::isfinite(f.intercept)) {
      throw SingularFit("ridge solution for instrument '" + id + "' is not finite");
    }
    model.coefficients.emplace(id, f);
  }
  return model;
}

double estimate_regression(const Readings& readings, const RidgeModel& model) {
  if (readings.empty()) throw InvalidInput("no readings to combine");
  double total = 0.0;
  std::size_t uncovered = 0;
  for (const auto& [id, value] : readings) {
    auto it = model.coefficients.find(id);
    if (it == model.coefficients.end()) {
      ++uncovered;
      total += value;
    } else {
      total += it->second(value);
    }
  }
  if (uncovered > 0) info(std::to_string(uncovered) + " reading(s) used the identity map");
  return total / static_cast<double>(readings.size());
}

namespace {

double rmse_against(const std::map<std::string, double>& estimates, const ForecastPanel& panel) {
  double sse = 0.0;
  std::size_t n = 0;
  for (const auto& [id, v] : estimates) {
    const auto q = panel.find_quantity(id);
    if (!q || !panel.has_actual(*q)) continue;
    const double err = v - *panel.actual(*q);
    sse += err * err;
    ++n;
  }
  if (n == 0) throw InvalidInput("validation panel has no scorable quantity");
  return std::sqrt(sse / static_cast<double>(n));
}

}  // namespace

RidgeModel select_ridge(const ForecastPanel& train, const ForecastPanel& valid,
                        std::span<const double> grid) {
  if (grid.empty()) throw InvalidInput("ridge grid is empty");
  RidgeModel best;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (double strength : grid) {
    RidgeModel model = fit_ridge(train, strength);
    const double rmse = rmse_against(estimate_regression_panel(valid, model), valid);
    if (rmse < best_rmse) {
      best_rmse = rmse;
      best = std::move(model);
    }
  }
  return best;
}

std::map<std::string, double> estimate_naive_panel(const ForecastPanel& panel) {
  std::map<std::string, double> out;
  for (const auto& [q, readings] : readings_by_quantity(panel)) {
    double s = 0.0;
    for (const auto& [id, v] : readings) s += v;
    out.emplace(q, s / static_cast<double>(readings.size()));
  }
  return out;
}

std::map<std::string, double> estimate_weighted_panel(const ForecastPanel& panel,
                                                      const WeightVector& weights) {
  std::map<std::string, double> out;
  for (const auto& [q, readings] : readings_by_quantity(panel)) {
    out.emplace(q, estimate_weighted(readings, weights));
  }
  return out;
}

std::map<std::string, double> estimate_regression_panel(const ForecastPanel& panel,
                                                        const RidgeModel& model) {
  std::map<std::string, double> out;
  for (const auto& [q, readings] : readings_by_quantity(panel)) {
    out.emplace(q, estimate_regression(readings, model));
  }
  return out;
}

BreResult estimate_bre(const ForecastPanel& train, const ForecastPanel& valid,
                       const ForecastPanel& test, const HyperParams& hyper, double lambda0,
                       const GibbsBudget& budget, std::uint64_t inference_seed) {
  BreResult out;
  out.fit = fit(train, valid, 1, hyper, /*pinned=*/false);
  out.estimates = infer_point_estimates(test, out.fit.params, lambda0, budget, inference_seed);
  return out;
}

}  // namespace consensus
