#include "consensus/app.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>
#include <limits>

#include "consensus/error.hpp"
#include "consensus/log.hpp"
#include "consensus/random.hpp"

namespace consensus {

namespace {

// Stream tags for seeds derived from the master seed.
constexpr std::uint64_t kGroupStream = 0x6E0;
constexpr std::uint64_t kPanelStream = 0x9A1;
constexpr std::uint64_t kInferStream = 0x1AF;
constexpr std::uint64_t kBootstrapStream = 0xB00;

const std::map<std::string, std::string, std::less<>> kKeyHelp = {
    {"seed", "master seed; every random stream is derived from it"},
    {"output_dir", "directory receiving all artifacts"},
    {"verbosity", "0 quiet, 1 warnings, 2 progress"},
    {"delta", "probability that a reading is miscalibrated"},
    {"alpha", "miscalibration slope"},
    {"beta", "miscalibration offset"},
    {"sigma2", "noise variance of calibrated readings"},
    {"sigma_star2", "noise variance of miscalibrated readings"},
    {"num_quantities", "quantities per realisation"},
    {"instrument_counts", "instrument counts to sweep"},
    {"num_realizations", "realisations per instrument count"},
    {"estimators", "estimators to score (NE, CE, GE, BE)"},
    {"lambda0", "prior precision of the true value"},
    {"threads", "worker threads"},
    {"num_instruments", "instruments in the generated world"},
    {"coverage", "probability that an instrument covers a quantity"},
    {"groups", "calibration groups: [{alpha:[a-,a+], beta:[b-,b+], sigma, weight}]"},
    {"num_train", "training quantities"},
    {"num_valid", "validation quantities"},
    {"num_test", "test quantities"},
    {"train_forecasts", "training forecasts CSV"},
    {"train_actuals", "training actuals CSV"},
    {"valid_forecasts", "validation forecasts CSV"},
    {"valid_actuals", "validation actuals CSV"},
    {"test_forecasts", "test forecasts CSV"},
    {"forecasts", "forecasts CSV"},
    {"params", "parameter snapshot JSON"},
    {"num_groups", "number of latent calibration groups K"},
    {"pinned", "hold group 0 at the identity calibration"},
    {"lambda_grid", "prior strengths to try; the best validation RMSE wins"},
    {"prior_alpha", "prior centre of alpha"},
    {"prior_beta", "prior centre of beta"},
    {"prior_sigma", "prior centre of sigma"},
    {"learning_rate", "Adam step size"},
    {"minibatch_size", "entries per gradient step"},
    {"max_epochs", "epoch limit per restart"},
    {"patience", "epochs without validation improvement before stopping"},
    {"num_restarts", "independent restarts"},
    {"validation_lambda0", "prior precision used when scoring validation RMSE"},
    {"validation_samples", "Gibbs iterations used when scoring validation RMSE"},
    {"validation_burn_in", "Gibbs burn-in used when scoring validation RMSE"},
    {"num_samples", "Gibbs iterations"},
    {"burn_in", "Gibbs iterations discarded"},
    {"credible_level", "credible interval level"},
    {"ridge_grid", "ridge strengths to try"},
    {"predictions", "model name to prediction CSV"},
    {"actuals", "actuals CSV"},
    {"quantity_groups", "optional quantity_id,group CSV for macro metrics"},
    {"n_bootstrap", "bootstrap replicates"},
    {"ci_level", "bootstrap interval level"},
};

json hyper_defaults() {
  const HyperParams h;
  return {
      {"num_groups", 2},
      {"pinned", true},
      {"lambda_grid", kDefaultLambdaGrid},
      {"prior_alpha", h.prior_alpha},
      {"prior_beta", h.prior_beta},
      {"prior_sigma", h.prior_sigma},
      {"learning_rate", h.learning_rate},
      {"minibatch_size", h.minibatch_size},
      {"max_epochs", h.max_epochs},
      {"patience", h.patience},
      {"num_restarts", h.num_restarts},
      {"validation_lambda0", h.validation_lambda0},
      {"validation_samples", h.validation_samples},
      {"validation_burn_in", h.validation_burn_in},
  };
}

json default_groups() {
  return json::array({
      {{"alpha", {1.0, 1.0}}, {"beta", {0.0, 0.0}}, {"sigma", 1.0}, {"weight", 0.5}},
      {{"alpha", {0.7, 0.7}}, {"beta", {-0.3, -0.3}}, {"sigma", 0.5}, {"weight", 0.5}},
  });
}

// Keys naming files that must exist when the config is resolved.
std::vector<std::string> input_keys(std::string_view sub) {
  if (sub == "fit") return {"train_forecasts", "train_actuals", "valid_forecasts", "valid_actuals"};
  if (sub == "infer") return {"params", "forecasts"};
  if (sub == "baselines") {
    return {"train_forecasts", "train_actuals", "valid_forecasts", "valid_actuals",
            "test_forecasts"};
  }
  if (sub == "eval") return {"actuals", "quantity_groups"};
  return {};
}

[[noreturn]] void bad_value(std::string_view key, const std::string& why) {
  throw ConfigError("config key '" + std::string(key) + "': " + why);
}

template <typename T>
T get(const json& config, const char* key) {
  try {
    return config.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad_value(key, e.what());
  }
}

// Same JSON kind as the default (numbers of any flavour match each other).
bool same_kind(const json& value, const json& def) {
  if (def.is_number()) {
    if (!value.is_number()) return false;
    if (def.is_number_unsigned() || def.is_number_integer()) {
      return value.is_number_unsigned() ||
             (value.is_number_integer() && value.get<std::int64_t>() >= 0);
    }
    return true;
  }
  if (def.is_boolean()) return value.is_boolean();
  if (def.is_string()) return value.is_string();
  if (def.is_array()) return value.is_array();
  if (def.is_object()) return value.is_object();
  return true;
}

json parse_scalar(std::string_view key, const std::string& text, const json& def) {
  if (def.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    bad_value(key, "expected true or false, got '" + text + "'");
  }
  if (def.is_number_unsigned() || def.is_number_integer()) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      bad_value(key, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
  }
  if (def.is_number()) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      bad_value(key, "expected a number, got '" + text + "'");
    }
    return v;
  }
  return text;
}

json parse_override(std::string_view key, const std::string& text, const json& def) {
  if (def.is_array() || def.is_object()) {
    if (!text.empty() && (text.front() == '[' || text.front() == '{')) {
      try {
        return json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        bad_value(key, e.what());
      }
    }
    if (def.is_object()) bad_value(key, "expected a JSON object");
    const json element = def.empty() ? json("") : def.front();
    json out = json::array();
    std::size_t start = 0;
    while (start <= text.size()) {
      auto comma = text.find(',', start);
      if (comma == std::string::npos) comma = text.size();
      out.push_back(parse_scalar(key, text.substr(start, comma - start), element));
      start = comma + 1;
    }
    return out;
  }
  return parse_scalar(key, text, def);
}

std::uint64_t seed_of(const json& config) { return get<std::uint64_t>(config, "seed"); }

fs::path out_path(const json& config, const std::string& name) {
  return fs::path(get<std::string>(config, "output_dir")) / name;
}

HyperParams hyper_from(const json& c) {
  HyperParams h;
  h.prior_alpha = get<double>(c, "prior_alpha");
  h.prior_beta = get<double>(c, "prior_beta");
  h.prior_sigma = get<double>(c, "prior_sigma");
  h.learning_rate = get<double>(c, "learning_rate");
  h.minibatch_size = get<std::size_t>(c, "minibatch_size");
  h.max_epochs = get<std::size_t>(c, "max_epochs");
  h.patience = get<std::size_t>(c, "patience");
  h.num_restarts = get<std::size_t>(c, "num_restarts");
  h.validation_lambda0 = get<double>(c, "validation_lambda0");
  h.validation_samples = get<std::size_t>(c, "validation_samples");
  h.validation_burn_in = get<std::size_t>(c, "validation_burn_in");
  h.seed = seed_of(c);
  return h;
}

GibbsBudget budget_from(const json& c) {
  GibbsBudget b;
  b.num_samples = get<std::size_t>(c, "num_samples");
  b.burn_in = get<std::size_t>(c, "burn_in");
  b.credible_level = get<double>(c, "credible_level");
  return b;
}

std::vector<double> lambda_grid_of(const json& c) {
  auto grid = get<std::vector<double>>(c, "lambda_grid");
  if (grid.empty()) throw ConfigError("lambda_grid is empty");
  for (double v : grid) {
    if (!(v > 0.0)) throw ConfigError("lambda_grid values must be positive");
  }
  return grid;
}

void run_simulate(const json& c) {
  SyntheticConfig cfg;
  cfg.delta = get<double>(c, "delta");
  cfg.alpha = get<double>(c, "alpha");
  cfg.beta = get<double>(c, "beta");
  cfg.sigma2 = get<double>(c, "sigma2");
  cfg.sigma_star2 = get<double>(c, "sigma_star2");
  cfg.num_quantities = get<std::size_t>(c, "num_quantities");
  cfg.instrument_counts = get<std::vector<std::size_t>>(c, "instrument_counts");
  cfg.num_realizations = get<std::size_t>(c, "num_realizations");
  cfg.seed = seed_of(c);
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  std::vector<EstimatorKind> kinds;
  for (const auto& name : get<std::vector<std::string>>(c, "estimators")) {
    try {
      kinds.push_back(parse_estimator_kind(name));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  SweepOptions options;
  options.lambda0 = get<double>(c, "lambda0");
  options.threads = get<unsigned>(c, "threads");
  const auto result = run_sweep(cfg, kinds, options);
  write_text(out_path(c, "sweep.csv"), sweep_csv(result));
}

void run_generate(const json& c) {
  LvbcWorld world;
  world.num_instruments = get<std::size_t>(c, "num_instruments");
  world.coverage = get<double>(c, "coverage");
  for (const auto& g : get<json>(c, "groups")) {
    GroupSpec spec;
    try {
      spec.alpha = g.at("alpha").get<std::array<double, 2>>();
      spec.beta = g.at("beta").get<std::array<double, 2>>();
      spec.sigma = g.at("sigma").get<double>();
      spec.weight = g.at("weight").get<double>();
    } catch (const nlohmann::json::exception& e) {
      bad_value("groups", e.what());
    }
    world.groups.push_back(spec);
  }
  if (world.groups.empty()) bad_value("groups", "at least one group is required");
  if (world.num_instruments == 0) bad_value("num_instruments", "must be positive");
  if (!(world.coverage > 0.0 && world.coverage <= 1.0)) bad_value("coverage", "must lie in (0, 1]");

  const std::uint64_t seed = seed_of(c);
  const auto groups = assign_instrument_groups(world, derive_stream_seed(seed, 0, kGroupStream));
  std::string membership = "instrument_id,group\n";
  for (std::size_t j = 0; j < groups.size(); ++j) {
    membership += instrument_name(j) + ',' + std::to_string(groups[j]) + '\n';
  }
  write_text(out_path(c, "instrument_groups.csv"), membership);

  const std::pair<const char*, const char*> splits[] = {
      {"train", "num_train"}, {"valid", "num_valid"}, {"test", "num_test"}};
  std::uint64_t index = 0;
  for (const auto& [name, key] : splits) {
    const auto count = get<std::size_t>(c, key);
    if (count == 0) bad_value(key, "must be positive");
    const auto panel = generate_lvbc_panel(world, groups, count,
                                           derive_stream_seed(seed, ++index, kPanelStream),
                                           std::string(name) + "_q");
    write_text(out_path(c, std::string(name) + "_forecasts.csv"), forecast_csv(panel));
    write_text(out_path(c, std::string(name) + "_actuals.csv"), actuals_csv(panel));
  }
}

void run_fit(const json& c) {
  const auto train = parse_panel(get<std::string>(c, "train_forecasts"),
                                 get<std::string>(c, "train_actuals"));
  const auto valid = parse_panel(get<std::string>(c, "valid_forecasts"),
                                 get<std::string>(c, "valid_actuals"));
  HyperParams hyper = hyper_from(c);
  const auto result = fit_over_grid(train, valid, get<std::size_t>(c, "num_groups"), hyper,
                                    get<bool>(c, "pinned"), lambda_grid_of(c));
  write_json(out_path(c, "params.json"), to_json(result.params));
  write_text(out_path(c, "trace.csv"), trace_csv(result));
}

void run_infer(const json& c) {
  const auto params = lvbc_from_json(read_json(get<std::string>(c, "params")));
  const auto panel = parse_forecast_csv(get<std::string>(c, "forecasts"));
  const auto result = gibbs_run(panel, params, get<double>(c, "lambda0"), budget_from(c),
                                derive_stream_seed(seed_of(c), 0, kInferStream));
  write_text(out_path(c, "estimates.csv"), estimates_csv(result));
}

void run_baselines(const json& c) {
  const auto train = parse_panel(get<std::string>(c, "train_forecasts"),
                                 get<std::string>(c, "train_actuals"));
  const auto valid = parse_panel(get<std::string>(c, "valid_forecasts"),
                                 get<std::string>(c, "valid_actuals"));
  const auto test = parse_forecast_csv(get<std::string>(c, "test_forecasts"));

  write_text(out_path(c, "predictions_NE.csv"), values_csv(estimate_naive_panel(test)));

  const auto weights = fit_weights(train);
  write_json(out_path(c, "weights.json"), to_json(weights));
  write_text(out_path(c, "predictions_WE.csv"), values_csv(estimate_weighted_panel(test, weights)));

  const auto ridge_grid = get<std::vector<double>>(c, "ridge_grid");
  const auto ridge = select_ridge(train, valid, ridge_grid);
  write_json(out_path(c, "ridge.json"), to_json(ridge));
  write_text(out_path(c, "predictions_RE.csv"), values_csv(estimate_regression_panel(test, ridge)));

  const HyperParams hyper = hyper_from(c);
  const auto bre = fit_over_grid(train, valid, 1, hyper, false, lambda_grid_of(c));
  write_json(out_path(c, "bre_params.json"), to_json(bre.params));
  const auto estimates = infer_point_estimates(test, bre.params, get<double>(c, "lambda0"),
                                               budget_from(c),
                                               derive_stream_seed(seed_of(c), 0, kInferStream));
  write_text(out_path(c, "predictions_BRE.csv"), values_csv(estimates));
}

void run_eval(const json& c) {
  const auto actuals = read_value_csv(get<std::string>(c, "actuals"));
  const auto groups_path = get<std::string>(c, "quantity_groups");
  std::optional<GroupMap> groups;
  if (!groups_path.empty()) groups = read_group_csv(groups_path);
  const auto n_bootstrap = get<std::size_t>(c, "n_bootstrap");
  const auto ci_level = get<double>(c, "ci_level");
  const auto seed = derive_stream_seed(seed_of(c), 0, kBootstrapStream);

  std::vector<std::pair<std::string, EvalReport>> rows;
  const auto models = get<json>(c, "predictions");
  for (const auto& [model, path] : models.items()) {
    if (!path.is_string()) bad_value("predictions", "paths must be strings");
    const auto predictions = read_value_csv(path.get<std::string>());
    rows.emplace_back(model, bootstrap_report(predictions, actuals, groups ? &*groups : nullptr,
                                              n_bootstrap, ci_level, seed));
  }
  if (rows.empty()) bad_value("predictions", "no models to evaluate");
  write_json(out_path(c, "report.json"), report_json(rows));
  write_text(out_path(c, "report.csv"), report_csv(rows));
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"simulate", "generate", "fit",
                                              "infer",    "baselines", "eval"};
  return names;
}

json default_config(std::string_view sub) {
  json c = {{"seed", 0U}, {"output_dir", "."}, {"verbosity", 1U}};
  auto merge = [&c](const json& extra) {
    for (const auto& [k, v] : extra.items()) c[k] = v;
  };
  if (sub == "simulate") {
    const SyntheticConfig s;
    merge({{"delta", s.delta},
           {"alpha", s.alpha},
           {"beta", s.beta},
           {"sigma2", s.sigma2},
           {"sigma_star2", s.sigma_star2},
           {"num_quantities", s.num_quantities},
           {"instrument_counts", s.instrument_counts},
           {"num_realizations", s.num_realizations},
           {"estimators", {"NE", "CE", "GE", "BE"}},
           {"lambda0", kWeakPriorPrecision},
           {"threads", 1U}});
  } else if (sub == "generate") {
    merge({{"num_instruments", 50U},
           {"coverage", 1.0},
           {"groups", default_groups()},
           {"num_train", 400U},
           {"num_valid", 200U},
           {"num_test", 400U}});
  } else if (sub == "fit") {
    merge({{"train_forecasts", ""},
           {"train_actuals", ""},
           {"valid_forecasts", ""},
           {"valid_actuals", ""}});
    merge(hyper_defaults());
  } else if (sub == "infer") {
    const GibbsBudget b;
    merge({{"params", ""},
           {"forecasts", ""},
           {"lambda0", kWeakPriorPrecision},
           {"num_samples", b.num_samples},
           {"burn_in", b.burn_in},
           {"credible_level", b.credible_level}});
  } else if (sub == "baselines") {
    const GibbsBudget b;
    merge({{"train_forecasts", ""},
           {"train_actuals", ""},
           {"valid_forecasts", ""},
           {"valid_actuals", ""},
           {"test_forecasts", ""},
           {"ridge_grid", kDefaultRidgeGrid},
           {"lambda0", kWeakPriorPrecision},
           {"num_samples", b.num_samples},
           {"burn_in", b.burn_in},
           {"credible_level", b.credible_level}});
    merge(hyper_defaults());
    c.erase("num_groups");
    c.erase("pinned");
  } else if (sub == "eval") {
    merge({{"predictions", json::object()},
           {"actuals", ""},
           {"quantity_groups", ""},
           {"n_bootstrap", kDefaultBootstrap},
           {"ci_level", 0.95}});
  } else {
    throw ConfigError("unknown subcommand '" + std::string(sub) + "'");
  }
  return c;
}

std::string describe_key(std::string_view key) {
  auto it = kKeyHelp.find(key);
  return it == kKeyHelp.end() ? std::string() : it->second;
}

json resolve_config(std::string_view sub, const json& file_config,
                    const std::map<std::string, std::string>& overrides) {
  json config = default_config(sub);
  if (!file_config.is_null()) {
    if (!file_config.is_object()) throw ConfigError("config document must be a JSON object");
    for (const auto& [key, value] : file_config.items()) {
      if (!config.contains(key)) throw ConfigError("unknown config key '" + key + "'");
      if (!same_kind(value, config[key])) bad_value(key, "has the wrong type");
      config[key] = value;
    }
  }
  for (const auto& [key, text] : overrides) {
    if (!config.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    config[key] = parse_override(key, text, config[key]);
  }

  for (const auto& key : input_keys(sub)) {
    const auto path = get<std::string>(config, key.c_str());
    if (path.empty()) {
      if (key == "quantity_groups") continue;
      bad_value(key, "is required");
    }
    if (!fs::exists(path)) bad_value(key, "file '" + path + "' does not exist");
  }
  if (sub == "eval") {
    const auto& predictions = config["predictions"];
    for (const auto& [model, path] : predictions.items()) {
      if (!path.is_string()) bad_value("predictions", "paths must be strings");
      if (!fs::exists(path.get<std::string>())) {
        bad_value("predictions", "file '" + path.get<std::string>() + "' does not exist");
      }
    }
  }
  if (get<unsigned>(config, "verbosity") > 2) bad_value("verbosity", "must be 0, 1 or 2");
  return config;
}

void run_subcommand(std::string_view sub, const json& config) {
  verbosity() = static_cast<int>(get<unsigned>(config, "verbosity"));
  const fs::path dir = get<std::string>(config, "output_dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) bad_value("output_dir", "cannot create '" + dir.string() + "': " + ec.message());

  json echo = {{"subcommand", sub}};
  for (const auto& [k, v] : config.items()) echo[k] = v;
  write_json(dir / (std::string(sub) + "_config.json"), echo);

  if (sub == "simulate") run_simulate(config);
  else if (sub == "generate") run_generate(config);
  else if (sub == "fit") run_fit(config);
  else if (sub == "infer") run_infer(config);
  else if (sub == "baselines") run_baselines(config);
  else if (sub == "eval") run_eval(config);
  else throw ConfigError("unknown subcommand '" + std::string(sub) + "'");
}

int run_and_report(std::string_view sub, const json& config) {
  auto report = [](const std::string& code, int exit, std::string message) {
    std::replace(message.begin(), message.end(), '\n', ' ');
    std::cerr << "error code=" << code << " exit=" << exit << " message=" << message << '\n';
    return exit;
  };
  try {
    run_subcommand(sub, config);
    return 0;
  } catch (const Error& e) {
    return report(e.code(), e.exit_code(), e.what());
  } catch (const std::bad_alloc&) {
    return report("out_of_memory", static_cast<int>(ErrorCategory::kNumerical), "out of memory");
  } catch (const std::exception& e) {
    return report("internal", 1, e.what());
  }
}

}  // namespace consensus
