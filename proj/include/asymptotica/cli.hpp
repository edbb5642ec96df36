#pragma once

// Config-driven front end. A config is one JSON object:
//
//     {
//       "subcommand": "ode",          optional, must match the invoked one
//       "seed": 1,                    optional, echoed
//       "params": { ... },            subcommand parameters, unknown keys rejected
//       "checks": [                   optional acceptance predicates
//         {"metric": "max_abs_error", "op": "<=", "value": 5e-3},
//         {"metric": "y_direct@400", "op": "within", "value": -0.0722, "tol": 5e-4}
//       ]
//     }
//
// Each run writes <stem>.json (always) and CSV files when the subcommand
// produces series. Exit status: 0 all checks pass, 1 a check fails, 2 config
// error, 3 solver failure.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace asymptotica::cli {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, solver_error = 3 };

const std::vector<std::string>& subcommands();

/// Validates the top-level layout and every parameter key and type of
/// `config` for `subcommand`; throws ConfigError.
void validate_config(const std::string& subcommand, const Json& config);

struct RunResult {
  int exit_code = ExitCode::ok;
  Json summary;                    // empty on config or solver errors
  std::vector<std::filesystem::path> files;
  std::string message;             // error text or a one-line result
};

/// Runs one parsed config. Relative paths inside the config resolve against
/// `base_dir`; outputs are named `<stem>.json`, `<stem>.csv`, ...
RunResult run(const std::string& subcommand, const Json& config, const std::filesystem::path& base_dir,
              const std::filesystem::path& out_dir, const std::string& stem);

/// Reads and runs a config file; the stem is the file name without extension.
RunResult run_file(const std::string& subcommand, const std::filesystem::path& config_path,
                   const std::filesystem::path& out_dir);

/// Runs every config, at most `jobs` at a time, and returns the results in
/// input order.
std::vector<RunResult> run_files(const std::string& subcommand, const std::vector<std::filesystem::path>& configs,
                                 const std::filesystem::path& out_dir, int jobs);

/// Combined exit status: the largest code among the results.
int combined_exit_code(const std::vector<RunResult>& results);

/// Value printed with 17 significant digits.
std::string format_double(double x);

}  // namespace asymptotica::cli
