#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fkc/kernels.hpp"
#include "fkc/potential.hpp"

namespace fkc::cli {

// Config grammar, one statement per line:
//   # comment            (also after a value)
//   [section]            kernel | potential | task | grid
//   key = value
// Top-level keys (before any section): id, task.
// Grid lines read `section.key = v1, v2, ...`; `cap = N` bounds the sweep.

using Section = std::map<std::string, std::string>;

struct GridAxis {
  std::string section;
  std::string key;
  std::vector<std::string> values;
};

struct Scenario {
  std::string id;
  std::string task;
  Section kernel;
  Section potential;
  Section params;
  std::vector<GridAxis> grid;
  std::size_t sweep_cap = 1024;

  /// Resolved config text (defaults included) in the grammar above.
  std::string echo() const;
  std::string get(const std::string& key) const;
  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  /// Sets section.key, checking that the key exists.
  void set(const std::string& section, const std::string& key, const std::string& value);
};

const std::vector<std::string>& task_names();

/// Parses and fills in defaults for the kernel, the potential and the task.
/// Throws ParseError naming the offending line.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

kernels::JumpKernelSpec build_kernel(const Scenario& sc);
kernels::PotentialSpec build_potential(const Scenario& sc);

/// Points of the Cartesian grid (an empty grid yields the base scenario).
std::vector<Scenario> expand_grid(const Scenario& sc);

}  // namespace fkc::cli
