#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "consensus/io.hpp"

namespace consensus {

/// simulate, generate, fit, infer, baselines, eval.
const std::vector<std::string>& subcommand_names();

/// Every accepted key of a subcommand with its default value. Global keys
/// (seed, output_dir, verbosity) are included.
json default_config(std::string_view subcommand);

/// One-line description of a config key, used for --help.
std::string describe_key(std::string_view key);

/// Merges a config document and string-valued overrides onto the defaults.
/// Unknown keys, ill-typed values and missing input files raise ConfigError.
/// Overrides are parsed according to the type of the default: arrays accept
/// either a JSON literal or a comma-separated list.
json resolve_config(std::string_view subcommand, const json& file_config,
                    const std::map<std::string, std::string>& overrides);

/// Writes `<subcommand>_config.json` to the output directory, then runs the
/// pipeline and writes its artifacts. Errors propagate as consensus::Error.
void run_subcommand(std::string_view subcommand, const json& config);

/// run_subcommand with errors turned into a single stderr line
///   error code=<code> exit=<n> message=<text>
/// and the matching exit status.
int run_and_report(std::string_view subcommand, const json& config);

}  // namespace consensus
