#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stabopt/grid.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/value_field.hpp"

namespace stabopt::cli {

// Anything wrong with the run configuration: unreadable file, unknown key,
// wrong type, inconsistent case/parameter combination. Exits with code 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed and schema-checked configuration file. Optional fields stay unset
// when the file omits them; commands pull what they need through the
// accessors below, which turn a missing or inconsistent field into a
// ConfigError naming the key. The accepted keys are documented in README.md.
struct RunConfig {
  std::string config_path;  // empty when no file was given
  std::string config_dir;   // directory of the file; input paths resolve here

  std::string objective_name;
  std::map<std::string, double> objective_params;

  std::optional<CaseTag> case_tag;
  std::optional<double> lambda;
  std::optional<double> horizon;

  std::optional<double> grid_h;
  std::optional<Box> grid_box;

  std::optional<double> dt;              // control step
  std::optional<double> scheme_dt;       // PDE marching step override
  std::optional<long long> control_steps;
  double tolerance = 1e-8;               // stationary residual target
  double eps_target = 0.0;               // 0: certified just means sound
  std::vector<double> delta_list;
  std::optional<double> eta;
  std::vector<Vec> start_points;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int threads = 0;                       // 0 = hardware concurrency
  long long max_iterations = 600;
  double truncation = 12.0;              // stationary runs span truncation/lambda
  int bins = 32;                         // histogram bins per axis
  long long mc_draws = 0;                // 0 disables the sampling cross-check
  double verify_slack = 0.1;             // absolute slack on the a-priori bounds
  std::optional<std::string> field_file;
  std::optional<std::string> trajectory_file;

  bool scan_present = false;
  std::optional<std::string> scan_parameter;  // "lambda" or "t"
  std::vector<double> scan_values;

  Objective objective() const;
  CaseTag tag() const;
  // Case-consistent rate: positive for the discounted cases, exactly 0 for
  // the undiscounted one.
  double required_lambda() const;
  double required_horizon() const;
  GridSpec grid(const Objective& obj) const;
  double trajectory_dt() const { return dt.value_or(0.05); }
  // Control span: the horizon for evolutive cases; for the stationary case
  // the explicit horizon, else control_steps * dt, else truncation / lambda.
  double trajectory_horizon() const;
  // Resolves a data path against the config file location and requires the
  // file to exist.
  std::string input_path(const std::string& rel) const;
};

RunConfig load_config(const std::string& path);

// Command-line values land after the file so they win.
struct Overrides {
  std::optional<std::string> output;
  std::optional<long long> seed;
  std::optional<long long> threads;
};
void apply_overrides(RunConfig& cfg, const Overrides& ov);

}  // namespace stabopt::cli
