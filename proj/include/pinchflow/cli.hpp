#pragma once

// The pinchflow command line: config resolution and the verify, canonical,
// sweep, flow and report subcommands.
//
// A config is a JSON object
//
//   {"command": "sweep", "seed": 0, "output_dir": "pinchflow-out",
//    "params": {...}}
//
// whose params are checked against the command's defaults.  Every artifact
// embeds the resolved config.

#include <iosfwd>
#include <string_view>

#include <json.hpp>

namespace pinchflow::cli {

using Json = nlohmann::ordered_json;

enum ExitStatus : int {
  kPassed = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kNumericalAbort = 3,
};

/// Default params of a command; ConfigError for unknown commands.
Json default_params(std::string_view command);

/// Materializes defaults and rejects unknown keys or mistyped values
/// (ConfigError).  Numbers are stored with the type of their default.
Json resolve_config(const Json& config);

/// Runs one config.  Human-readable output goes to out, diagnostics to err.
int execute(const Json& config, std::ostream& out, std::ostream& err);

/// Parses flags (or --config FILE, overridden by flags) and executes.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pinchflow::cli
