// Command-line front end: one subcommand per pipeline stage.
//
//   consensus <subcommand> [--config run.json] [--some-key value ...]
//
// Every config key is also a flag (underscores become dashes) and flags win
// over the config file.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

#include "consensus/app.hpp"
#include "consensus/error.hpp"

namespace {

struct SubcommandFlags {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::optional<std::string>> values;
};

std::string flag_name(std::string key) {
  for (auto& ch : key) {
    if (ch == '_') ch = '-';
  }
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  using consensus::json;

  CLI::App app{"Consensus estimation from miscalibrated instruments"};
  app.require_subcommand(1);

  std::vector<SubcommandFlags> subs;
  subs.reserve(consensus::subcommand_names().size());
  for (const auto& name : consensus::subcommand_names()) {
    auto& s = subs.emplace_back();
    s.app = app.add_subcommand(name);
    s.app->add_option("--config", s.config_path, "JSON config document")->check(CLI::ExistingFile);
    const json defaults = consensus::default_config(name);
    for (const auto& [key, def] : defaults.items()) {
      auto& slot = s.values[key];
      s.app->add_option(flag_name(key), slot, consensus::describe_key(key))
          ->default_str(def.is_string() ? def.get<std::string>() : def.dump());
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : static_cast<int>(consensus::ErrorCategory::kConfig);
  }

  for (const auto& s : subs) {
    if (!s.app->parsed()) continue;
    const std::string name = s.app->get_name();
    json config;
    try {
      json file;
      if (!s.config_path.empty()) file = consensus::read_json(s.config_path);
      std::map<std::string, std::string> overrides;
      for (const auto& [key, value] : s.values) {
        if (value) overrides.emplace(key, *value);
      }
      config = consensus::resolve_config(name, file, overrides);
    } catch (const consensus::Error& e) {
      const int exit = static_cast<int>(consensus::ErrorCategory::kConfig);
      std::cerr << "error code=" << e.code() << " exit=" << exit << " message=" << e.what()
                << '\n';
      return exit;
    }
    return consensus::run_and_report(name, config);
  }
  return static_cast<int>(consensus::ErrorCategory::kConfig);
}
