#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "consensus/baselines.hpp"
#include "consensus/gibbs.hpp"
#include "consensus/lvbc.hpp"
#include "consensus/metrics.hpp"
#include "consensus/panel.hpp"
#include "consensus/synthetic.hpp"

namespace consensus {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// 17 significant digits, enough to round-trip any finite double.
std::string format_double(double value);

/// Parses a full field as a double; throws ParseError naming path and line.
double parse_double(std::string_view field, const std::string& path, std::size_t line);

// --- readers --------------------------------------------------------------

/// Reads `quantity_id,instrument_id,forecast`. Duplicate pairs raise
/// ConflictError naming the offending line.
ForecastPanel parse_forecast_csv(const fs::path& path);

/// Reads `quantity_id,actual` into an existing panel.
void load_actuals_csv(const fs::path& path, ForecastPanel& panel);

/// Forecasts plus actuals from a sibling file.
ForecastPanel parse_panel(const fs::path& forecasts, const fs::path& actuals);

/// Two-column value table keyed by quantity id. When a `point_estimate`
/// column exists it is used, otherwise the second column.
ValueMap read_value_csv(const fs::path& path);

/// `quantity_id,group` table.
GroupMap read_group_csv(const fs::path& path);

// --- writers --------------------------------------------------------------

void write_text(const fs::path& path, const std::string& content);

std::string forecast_csv(const ForecastPanel& panel);
std::string actuals_csv(const ForecastPanel& panel);
/// Realisation readings as a forecast table; quantities are "q<i>" and
/// instruments use instrument_name.
std::string realization_forecast_csv(const Realization& realization);
std::string realization_actuals_csv(const Realization& realization);

std::string sweep_csv(const SweepResult& result);
std::string estimates_csv(const GibbsResult& result);
std::string values_csv(const ValueMap& values, std::string_view column = "point_estimate");
std::string trace_csv(const FitResult& fit);

/// One row per model; macro fields are empty when no groups were given.
std::string report_csv(const std::vector<std::pair<std::string, EvalReport>>& rows);
json report_json(const std::vector<std::pair<std::string, EvalReport>>& rows);

// --- snapshots ------------------------------------------------------------

json to_json(const LvbcParameters& params);
json to_json(const RidgeModel& model);
json to_json(const WeightVector& weights);

LvbcParameters lvbc_from_json(const json& doc);
RidgeModel ridge_from_json(const json& doc);
WeightVector weights_from_json(const json& doc);

json read_json(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const json& doc);

}  // namespace consensus
