#pragma once

#include "tdhfb/config.hpp"
#include "tdhfb/errors.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tdhfb {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool empty() const { return rows.empty(); }
  // Column by name; throws argument if missing.
  std::vector<double> column(const std::string& name) const;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, std::string>> notes;
  Table diagnostics;
  Table summary;
  // Scenario-level verdict (e.g. drift threshold, monotone trend).
  bool passed = true;
  std::string verdict;
  // Non-zero when the verdict is a numerical failure (drift beyond threshold).
  int exit_code = 0;

  double metric(const std::string& name) const;
  bool has_metric(const std::string& name) const;
};

// Scenario drivers. They throw Error on configuration, numerical or
// truncation failures.
ScenarioReport run_identities(const RunConfig& cfg);
ScenarioReport run_free(const RunConfig& cfg);
ScenarioReport run_hartree(const RunConfig& cfg);
ScenarioReport run_full(const RunConfig& cfg);
ScenarioReport run_flowcheck(const RunConfig& cfg);
ScenarioReport run_fock(const RunConfig& cfg);
ScenarioReport run_scenario(const RunConfig& cfg);

// Process exit codes.
enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numerical = 2, exit_truncation = 3 };

int exit_code_for(ErrorCode code);

// Runs the scenario and writes manifest.yaml, diagnostics.csv and summary.csv
// into cfg.out_dir. Returns the process exit code; failures are reported on log.
int run(const RunConfig& cfg, std::ostream& log);

// CSV with a header row and %.17g values, LF line endings.
void write_csv(const std::string& path, const Table& table);

}  // namespace tdhfb
