#pragma once

// Scenario runner behind the arwmass command line tool. A scenario is one
// JSON document naming a spacetime and a command; the result is a single
// table written as <command>.csv or <command>.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace arwmass::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kValidationFailure = 2, kNumericalAbort = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> summary;  // written as comment lines
};

/// FNV-1a 64 of the compact, key-sorted dump of the config, as 16 hex digits.
std::string config_digest(const nlohmann::json& config);

std::string format_number(double x);  // %.17g
void write_csv(std::ostream& out, const Table& table, const std::string& digest);
void write_json(std::ostream& out, const Table& table, const std::string& digest, const std::string& command);

struct RunResult {
  int exit_code = kOk;
  std::string message;
  std::optional<std::filesystem::path> output;
  Table table;
};

/// Runs the command and writes its table unless a config error occurs.
/// `output_dir` overrides output.path.
RunResult run(const nlohmann::json& config, const std::optional<std::filesystem::path>& output_dir = std::nullopt);
RunResult run_file(const std::filesystem::path& config_path,
                   const std::optional<std::filesystem::path>& output_dir = std::nullopt);

}  // namespace arwmass::cli
