#pragma once

#include "carnot/report.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

/// Exit statuses of run_command.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInternal = 3;

struct RunConfig {
  std::string command;
  std::string group = "heisenberg:1";  // builtin spec or descriptor file
  std::string function;                // registry name, JSON file or inline JSON
  std::vector<std::string> points;     // "x1,x2,..."; the second one is y or h
  std::string plan_file;
  std::string out;  // JSON report path; curves go to the same stem with .csv
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;  // overrides the command's headline tolerance
  bool force = false;
};

struct RunResult {
  int status = kExitPass;
  Report report;
  std::string error;  // set for statuses 2 and 3, and for rejected inputs
};

const std::vector<std::string>& command_names();

/// Dispatches one subcommand, writes the report files when cfg.out is set
/// and prints the human summary to `out`. Never throws.
RunResult run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// The CSV path paired with a JSON report path: same stem, ".csv".
std::string csv_path_for(const std::string& json_path);

}  // namespace carnot
