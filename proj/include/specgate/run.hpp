#pragma once

// Plan execution. Exit codes: 0 consistent or certified, 1 usage or parse
// error, 2 hypothesis not met (or inconclusive), 3 theorem-violating verdict.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specgate/json_io.hpp"
#include "specgate/plan.hpp"

namespace specgate::run {

inline constexpr const char* kVersion = "1.0.0";

enum class Command { Govern, Certify, Semigroup, Fuzz };
std::string to_string(Command c);

struct RunOptions {
  Command command = Command::Govern;
  std::optional<std::size_t> cases;     // fuzz: stable case count
  std::optional<std::size_t> marginal;  // fuzz: marginal case count
  std::optional<std::size_t> workers;
  std::optional<unsigned long long> seed;
};

struct RunResult {
  int exit_code = 1;
  io::json report;
  std::string summary;
  /// (file name, contents) pairs for --csv.
  std::vector<std::pair<std::string, std::string>> csv;
  /// (file name, plan) pairs for shrunk fuzz failures.
  std::vector<std::pair<std::string, io::json>> reproducers;
};

RunResult run(plan::AnalysisPlan plan, const RunOptions& options);

/// Copy of a report without its timestamp, for reproducibility checks.
io::json without_timestamp(io::json report);

}  // namespace specgate::run
