#pragma once

// Scenario files: a list of (construction, task) items with tolerances and a
// seed. Items run in parallel; the report keeps scenario order.
//
// Exit codes: 0 success, 2 schema error, 3 infeasible certify verdict,
// 4 undecided, 5 internal check failure. Across items the most severe code
// wins, in the order 5 > 2 > 4 > 3 > 0. A schema error found while parsing
// stops before any item runs; bad parameter values found while building an
// item also report 2.

#include "snn/json_io.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace snn {

enum ExitCode : int { kExitOk = 0, kExitSchema = 2, kExitInfeasible = 3, kExitUndecided = 4, kExitCheck = 5 };

/// A scenario that does not match the schema; `pointer` is a JSON pointer to
/// the offending key.
class SchemaError : public std::runtime_error {
public:
  SchemaError(std::string pointer, const std::string& what)
      : std::runtime_error(pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

private:
  std::string pointer_;
};

/// Command-line values that take precedence over the scenario file.
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> budget;
  std::optional<std::string> out;
};

struct ScenarioResult {
  int exit_code = kExitOk;
  Json report;                             ///< null on schema error
  std::map<std::string, Json> artifacts;   ///< extra files keyed by file name
  std::string error;                       ///< schema error message, with pointer
  std::optional<std::string> out_dir;      ///< from overrides or the scenario
};

/// Throws SchemaError on the first violation.
void validate_scenario(const Json& doc, const ScenarioOverrides& ov = {});

ScenarioResult run_scenario(const Json& doc, const ScenarioOverrides& ov = {});
/// Parse errors and unreadable files count as schema errors.
ScenarioResult run_scenario_file(const std::string& path, const ScenarioOverrides& ov = {});

/// Human-readable summary of a report.
std::string render_table(const Json& report);

/// Write report.json and the artifacts into `dir` (created if needed), each
/// through a temporary file and a rename.
void write_outputs(const ScenarioResult& result, const std::string& dir);

void write_file_atomically(const std::string& path, const std::string& content);

} // namespace snn
