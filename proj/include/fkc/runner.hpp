#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fkc/scenario.hpp"

namespace fkc::cli {

/// Tabular output of one task: the detailed CSV plus a one-row summary used
/// by sweeps.
struct TaskResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> summary_columns;
  std::vector<std::string> summary;
  std::vector<std::string> notes;
};

TaskResult run_task(const Scenario& sc);
/// Assumption checks only (the `validate` task and command).
TaskResult validate_task(const Scenario& sc);

enum ExitStatus : int { ok = 0, internal_error = 1, assumption_failure = 2 };

/// Each writes `<out_dir>/<id>/<task>.csv` and `<out_dir>/<id>/report.txt`.
/// Messages go to `log`.
int run(const std::string& config_path, const std::string& out_dir, std::ostream& log);
int sweep(const std::string& config_path, const std::string& out_dir, std::ostream& log);
int validate(const std::string& config_path, const std::string& out_dir, std::ostream& log);

std::string to_csv(const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows);

}  // namespace fkc::cli
