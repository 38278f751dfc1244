#include "consensus/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "consensus/error.hpp"

namespace consensus {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view field, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError(path, line, "not a number: '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(path, line, "non-finite value: '" + std::string(field) + "'");
  }
  return value;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// Calls fn(fields, line_number) for every non-empty data row after checking
// the header.
template <typename Fn>
void for_each_row(const fs::path& path, std::span<const std::string_view> header, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  const std::string name = path.string();
  std::string line;
  std::size_t number = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!seen_header) {
      const auto fields = split(line);
      bool ok = fields.size() == header.size();
      for (std::size_t c = 0; ok && c < header.size(); ++c) ok = fields[c] == header[c];
      if (!ok) {
        std::string want;
        for (auto h : header) want += (want.empty() ? "" : ",") + std::string(h);
        throw ParseError(name, number, "expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError(name, number,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    if (fields.front().empty()) throw ParseError(name, number, "empty quantity_id");
    fn(fields, number);
  }
  if (!seen_header) throw ParseError(name, number, "missing header");
}

constexpr std::string_view kForecastHeader[] = {"quantity_id", "instrument_id", "forecast"};
constexpr std::string_view kActualsHeader[] = {"quantity_id", "actual"};
constexpr std::string_view kGroupHeader[] = {"quantity_id", "group"};

}  // namespace

ForecastPanel parse_forecast_csv(const fs::path& path) {
  ForecastPanel panel;
  const std::string name = path.string();
  for_each_row(path, kForecastHeader, [&](const auto& f, std::size_t line) {
    if (f[1].empty()) throw ParseError(name, line, "empty instrument_id");
    const double value = parse_double(f[2], name, line);
    try {
      panel.add_forecast(std::string(f[0]), std::string(f[1]), value);
    } catch (const ConflictError& e) {
      throw ConflictError(name + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  if (panel.empty()) throw InvalidInput("'" + name + "' contains no forecasts");
  return panel;
}

void load_actuals_csv(const fs::path& path, ForecastPanel& panel) {
  const std::string name = path.string();
  for_each_row(path, kActualsHeader, [&](const auto& f, std::size_t line) {
    const double value = parse_double(f[1], name, line);
    try {
      panel.set_actual(std::string(f[0]), value);
    } catch (const ConflictError& e) {
      throw ConflictError(name + ":" + std::to_string(line) + ": " + e.what());
    }
  });
}

ForecastPanel parse_panel(const fs::path& forecasts, const fs::path& actuals) {
  ForecastPanel panel = parse_forecast_csv(forecasts);
  load_actuals_csv(actuals, panel);
  return panel;
}

ValueMap read_value_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  const std::string name = path.string();
  std::string line;
  std::size_t number = 0;
  std::size_t column = 1;
  std::size_t width = 0;
  ValueMap out;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split(line);
    if (number == 1) {
      if (fields.size() < 2 || fields[0] != "quantity_id") {
        throw ParseError(name, number, "expected header starting 'quantity_id,'");
      }
      for (std::size_t c = 1; c < fields.size(); ++c) {
        if (fields[c] == "point_estimate") column = c;
      }
      width = fields.size();
      continue;
    }
    if (line.empty()) continue;
    if (fields.size() != width) {
      throw ParseError(name, number,
                       "expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()));
    }
    if (!out.emplace(std::string(fields[0]), parse_double(fields[column], name, number)).second) {
      throw ConflictError(name + ":" + std::to_string(number) + ": duplicate quantity '" +
                          std::string(fields[0]) + "'");
    }
  }
  if (number == 0) throw ParseError(name, 1, "missing header");
  return out;
}

GroupMap read_group_csv(const fs::path& path) {
  GroupMap out;
  const std::string name = path.string();
  for_each_row(path, kGroupHeader, [&](const auto& f, std::size_t line) {
    if (!out.emplace(std::string(f[0]), std::string(f[1])).second) {
      throw ConflictError(name + ":" + std::to_string(line) + ": duplicate quantity '" +
                          std::string(f[0]) + "'");
    }
  });
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InvalidInput("write to '" + path.string() + "' failed");
}

std::string forecast_csv(const ForecastPanel& panel) {
  std::string s = "quantity_id,instrument_id,forecast\n";
  for (const auto& e : panel.entries()) {
    s += panel.quantity_ids()[e.quantity];
    s += ',';
    s += panel.instrument_ids()[e.instrument];
    s += ',';
    s += format_double(e.forecast);
    s += '\n';
  }
  return s;
}

std::string actuals_csv(const ForecastPanel& panel) {
  std::string s = "quantity_id,actual\n";
  for (std::size_t q = 0; q < panel.num_quantities(); ++q) {
    if (!panel.has_actual(q)) continue;
    s += panel.quantity_ids()[q] + ',' + format_double(*panel.actual(q)) + '\n';
  }
  return s;
}

std::string realization_forecast_csv(const Realization& r) {
  std::string s = "quantity_id,instrument_id,forecast\n";
  for (std::size_t i = 0; i < r.num_quantities; ++i) {
    for (std::size_t j = 0; j < r.num_instruments; ++j) {
      s += 'q' + std::to_string(i) + ',' + instrument_name(j) + ',' +
           format_double(r.reading(i, j)) + '\n';
    }
  }
  return s;
}

std::string realization_actuals_csv(const Realization& r) {
  std::string s = "quantity_id,actual\n";
  for (std::size_t i = 0; i < r.num_quantities; ++i) {
    s += 'q' + std::to_string(i) + ',' + format_double(r.truths[i]) + '\n';
  }
  return s;
}

std::string sweep_csv(const SweepResult& result) {
  std::string s = "instrument_count,estimator,mean_rmse,stderr\n";
  for (const auto& row : result.rows) {
    s += std::to_string(row.instrument_count) + ',' + std::string(to_string(row.kind)) + ',' +
         format_double(row.mean_rmse) + ',' + format_double(row.stderr_rmse) + '\n';
  }
  return s;
}

std::string estimates_csv(const GibbsResult& result) {
  std::string s = "quantity_id,point_estimate,ci_low,ci_high,n_samples\n";
  for (const auto& c : result.chains) {
    s += c.quantity_id + ',' + format_double(c.point_estimate) + ',' + format_double(c.ci_low) +
         ',' + format_double(c.ci_high) + ',' + std::to_string(c.samples.size()) + '\n';
  }
  return s;
}

std::string values_csv(const ValueMap& values, std::string_view column) {
  std::string s = "quantity_id," + std::string(column) + '\n';
  for (const auto& [id, v] : values) s += id + ',' + format_double(v) + '\n';
  return s;
}

std::string trace_csv(const FitResult& fit) {
  std::string s = "restart,epoch,neg_elbo,valid_rmse\n";
  for (const auto& r : fit.restarts) {
    for (const auto& e : r.trace) {
      s += std::to_string(r.restart) + ',' + std::to_string(e.epoch) + ',' +
           format_double(e.neg_elbo) + ',' + format_double(e.valid_rmse) + '\n';
    }
  }
  return s;
}

std::string report_csv(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::string s = "model,macro_rmse,macro_mae,micro_rmse,micro_mae,micro_r2\n";
  for (const auto& [model, r] : rows) {
    s += model + ',';
    if (r.macro) s += format_double(r.macro->rmse.point) + ',' + format_double(r.macro->mae.point);
    else s += ',';
    s += ',' + format_double(r.micro.rmse.point) + ',' + format_double(r.micro.mae.point) + ',' +
         (r.micro.r2 ? format_double(r.micro.r2->point) : std::string()) + '\n';
  }
  return s;
}

namespace {

json interval_json(const Interval& iv) {
  return {{"value", iv.point}, {"ci_low", iv.ci_low}, {"ci_high", iv.ci_high}};
}

json intervals_json(const MetricIntervals& m) {
  json j;
  j["rmse"] = interval_json(m.rmse);
  j["mae"] = interval_json(m.mae);
  if (m.r2) j["r2"] = interval_json(*m.r2);
  return j;
}

json envelope(std::string_view kind) {
  return {{"format_version", kFormatVersion}, {"kind", kind}};
}

void check_envelope(const json& doc, std::string_view kind) {
  if (!doc.is_object()) throw InvalidInput("snapshot is not a JSON object");
  if (!doc.contains("format_version") || doc["format_version"] != kFormatVersion) {
    throw InvalidInput("unsupported snapshot format_version");
  }
  if (doc.contains("kind") && doc["kind"] != kind) {
    throw InvalidInput("snapshot kind is '" + doc["kind"].get<std::string>() + "', expected '" +
                       std::string(kind) + "'");
  }
}

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InvalidInput(std::string("snapshot lacks field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("snapshot field '") + key + "': " + e.what());
  }
}

}  // namespace

json report_json(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  json doc = envelope("eval_report");
  json models = json::array();
  for (const auto& [model, r] : rows) {
    json m;
    m["model"] = model;
    m["n_bootstrap"] = r.n_bootstrap;
    m["ci_level"] = r.ci_level;
    m["micro"] = intervals_json(r.micro);
    m["macro"] = r.macro ? intervals_json(*r.macro) : json(nullptr);
    models.push_back(std::move(m));
  }
  doc["models"] = std::move(models);
  return doc;
}

json to_json(const LvbcParameters& p) {
  json doc = envelope("lvbc_parameters");
  doc["num_groups"] = p.num_groups;
  doc["pinned_group"] = p.pinned ? json(0) : json(nullptr);
  doc["alpha"] = p.alpha;
  doc["beta"] = p.beta;
  doc["log_sigma"] = p.log_sigma;
  doc["instruments"] = p.instruments;
  json logits = json::array();
  for (std::size_t j = 0; j < p.num_instruments(); ++j) {
    logits.push_back(std::vector<double>(p.logits.begin() + static_cast<long>(j * p.num_groups),
                                         p.logits.begin() + static_cast<long>((j + 1) * p.num_groups)));
  }
  doc["logits"] = std::move(logits);
  return doc;
}

LvbcParameters lvbc_from_json(const json& doc) {
  check_envelope(doc, "lvbc_parameters");
  LvbcParameters p;
  p.num_groups = field<std::size_t>(doc, "num_groups");
  if (!doc.contains("pinned_group")) throw InvalidInput("snapshot lacks field 'pinned_group'");
  const auto& pin = doc["pinned_group"];
  if (pin.is_null()) {
    p.pinned = false;
  } else if (pin == 0) {
    p.pinned = true;
  } else {
    throw InvalidInput("pinned_group must be 0 or null");
  }
  p.alpha = field<std::vector<std::array<double, 2>>>(doc, "alpha");
  p.beta = field<std::vector<std::array<double, 2>>>(doc, "beta");
  p.log_sigma = field<std::vector<double>>(doc, "log_sigma");
  p.instruments = field<std::vector<std::string>>(doc, "instruments");
  const auto rows = field<std::vector<std::vector<double>>>(doc, "logits");
  for (const auto& row : rows) {
    if (row.size() != p.num_groups) throw InvalidInput("logits row length differs from num_groups");
    p.logits.insert(p.logits.end(), row.begin(), row.end());
  }
  p.validate();
  return p;
}

json to_json(const RidgeModel& model) {
  json doc = envelope("ridge_model");
  doc["ridge_strength"] = model.ridge_strength;
  json coef = json::object();
  for (const auto& [id, f] : model.coefficients) {
    coef[id] = {{"slope", f.slope}, {"intercept", f.intercept}};
  }
  doc["coefficients"] = std::move(coef);
  return doc;
}

RidgeModel ridge_from_json(const json& doc) {
  check_envelope(doc, "ridge_model");
  RidgeModel model;
  model.ridge_strength = field<double>(doc, "ridge_strength");
  const auto coef = field<json>(doc, "coefficients");
  for (const auto& [id, f] : coef.items()) {
    model.coefficients.emplace(id, AffineMap{field<double>(f, "slope"), field<double>(f, "intercept")});
  }
  return model;
}

json to_json(const WeightVector& weights) {
  json doc = envelope("weight_vector");
  doc["weights"] = weights.weights;
  return doc;
}

WeightVector weights_from_json(const json& doc) {
  check_envelope(doc, "weight_vector");
  WeightVector w;
  w.weights = field<std::map<std::string, double>>(doc, "weights");
  return w;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + '\n'); }

}  // namespace consensus
