#include "run_config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace stabopt::cli {

using nlohmann::json;

namespace {

constexpr const char* kTopKeys =
    "objective, case, lambda, horizon, grid, dt, scheme_dt, tolerance, "
    "control_steps, eps_target, delta_list, eta, start_points, seed, "
    "output_dir, threads, max_iterations, truncation, bins, mc_draws, "
    "verify_slack, field_file, trajectory_file, scan";

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail("'" + path + "' must be a number");
  return v.get<double>();
}

double as_positive(const json& v, const std::string& path) {
  double x = as_number(v, path);
  if (!(x > 0.0)) fail("'" + path + "' must be > 0");
  return x;
}

long long as_integer(const json& v, const std::string& path, long long min) {
  if (!v.is_number_integer()) fail("'" + path + "' must be an integer");
  long long x = v.get<long long>();
  if (x < min) fail("'" + path + "' must be >= " + std::to_string(min));
  return x;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail("'" + path + "' must be a string");
  return v.get<std::string>();
}

Vec as_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail("'" + path + "' must be a non-empty array of numbers");
  Vec out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void parse_objective(const json& v, RunConfig& cfg) {
  if (!v.is_object()) fail("'objective' must be an object {name, params}");
  for (const auto& [k, sub] : v.items()) {
    if (k == "name") {
      cfg.objective_name = as_string(sub, "objective.name");
    } else if (k == "params") {
      if (!sub.is_object()) fail("'objective.params' must be an object of numbers");
      for (const auto& [pk, pv] : sub.items())
        cfg.objective_params[pk] = as_number(pv, "objective.params." + pk);
    } else {
      fail("unknown key 'objective." + k + "'; accepted: name, params");
    }
  }
  if (cfg.objective_name.empty()) fail("'objective' needs a 'name'");
}

void parse_grid(const json& v, RunConfig& cfg) {
  if (!v.is_object()) fail("'grid' must be an object {h, box}");
  for (const auto& [k, sub] : v.items()) {
    if (k == "h") {
      cfg.grid_h = as_positive(sub, "grid.h");
    } else if (k == "box") {
      if (!sub.is_object()) fail("'grid.box' must be an object {lo, hi}");
      Vec lo, hi;
      for (const auto& [bk, bv] : sub.items()) {
        if (bk == "lo") lo = as_vector(bv, "grid.box.lo");
        else if (bk == "hi") hi = as_vector(bv, "grid.box.hi");
        else fail("unknown key 'grid.box." + bk + "'; accepted: lo, hi");
      }
      try {
        cfg.grid_box = Box(lo, hi);
      } catch (const std::invalid_argument& e) {
        fail(std::string("grid.box: ") + e.what());
      }
    } else {
      fail("unknown key 'grid." + k + "'; accepted: h, box");
    }
  }
  if (!cfg.grid_h) fail("'grid' needs 'h'");
}

void parse_scan(const json& v, RunConfig& cfg) {
  if (!v.is_object()) fail("'scan' must be an object {parameter, values}");
  cfg.scan_present = true;
  for (const auto& [k, sub] : v.items()) {
    if (k == "parameter") {
      std::string p = as_string(sub, "scan.parameter");
      if (p != "lambda" && p != "t") fail("'scan.parameter' must be 'lambda' or 't'");
      cfg.scan_parameter = p;
    } else if (k == "values") {
      if (!sub.is_array()) fail("'scan.values' must be an array of numbers");
      for (std::size_t i = 0; i < sub.size(); ++i)
        cfg.scan_values.push_back(
            as_positive(sub[i], "scan.values[" + std::to_string(i) + "]"));
    } else {
      fail("unknown key 'scan." + k + "'; accepted: parameter, values");
    }
  }
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(path + ": " + e.what());
  }
  if (!j.is_object()) fail(path + ": top level must be an object");

  RunConfig cfg;
  cfg.config_path = path;
  cfg.config_dir = std::filesystem::path(path).parent_path().string();

  for (const auto& [key, val] : j.items()) {
    if (key == "objective") parse_objective(val, cfg);
    else if (key == "case") {
      std::string name = as_string(val, "case");
      try {
        cfg.case_tag = case_from_name(name);
      } catch (const std::invalid_argument&) {
        fail("'case' must be one of evolutive_discounted, stationary_discounted, "
             "evolutive_undiscounted; got '" + name + "'");
      }
    }
    else if (key == "lambda") {
      double l = as_number(val, "lambda");
      if (l < 0.0) fail("'lambda' must be >= 0");
      cfg.lambda = l;
    }
    else if (key == "horizon") cfg.horizon = as_positive(val, "horizon");
    else if (key == "grid") parse_grid(val, cfg);
    else if (key == "dt") cfg.dt = as_positive(val, "dt");
    else if (key == "scheme_dt") cfg.scheme_dt = as_positive(val, "scheme_dt");
    else if (key == "tolerance") cfg.tolerance = as_positive(val, "tolerance");
    else if (key == "control_steps") cfg.control_steps = as_integer(val, "control_steps", 1);
    else if (key == "eps_target") {
      double t = as_number(val, "eps_target");
      if (t < 0.0) fail("'eps_target' must be >= 0");
      cfg.eps_target = t;
    }
    else if (key == "delta_list") {
      if (!val.is_array()) fail("'delta_list' must be an array of numbers");
      for (std::size_t i = 0; i < val.size(); ++i)
        cfg.delta_list.push_back(as_positive(val[i], "delta_list[" + std::to_string(i) + "]"));
    }
    else if (key == "eta") cfg.eta = as_positive(val, "eta");
    else if (key == "start_points") {
      if (!val.is_array()) fail("'start_points' must be an array of points");
      for (std::size_t i = 0; i < val.size(); ++i)
        cfg.start_points.push_back(
            as_vector(val[i], "start_points[" + std::to_string(i) + "]"));
    }
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_integer(val, "seed", 0));
    else if (key == "output_dir") cfg.output_dir = as_string(val, "output_dir");
    else if (key == "threads") cfg.threads = static_cast<int>(as_integer(val, "threads", 0));
    else if (key == "max_iterations") cfg.max_iterations = as_integer(val, "max_iterations", 1);
    else if (key == "truncation") cfg.truncation = as_positive(val, "truncation");
    else if (key == "bins") cfg.bins = static_cast<int>(as_integer(val, "bins", 2));
    else if (key == "mc_draws") {
      cfg.mc_draws = as_integer(val, "mc_draws", 0);
      if (cfg.mc_draws != 0 && cfg.mc_draws < 1000)
        fail("'mc_draws' must be 0 (off) or at least 1000");
    }
    else if (key == "verify_slack") {
      double s = as_number(val, "verify_slack");
      if (s < 0.0) fail("'verify_slack' must be >= 0");
      cfg.verify_slack = s;
    }
    else if (key == "field_file") cfg.field_file = as_string(val, "field_file");
    else if (key == "trajectory_file") cfg.trajectory_file = as_string(val, "trajectory_file");
    else if (key == "scan") parse_scan(val, cfg);
    else fail("unknown key '" + key + "'; accepted keys: " + kTopKeys);
  }
  return cfg;
}

void apply_overrides(RunConfig& cfg, const Overrides& ov) {
  if (ov.output) cfg.output_dir = *ov.output;
  if (ov.seed) {
    if (*ov.seed < 0) fail("--seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*ov.seed);
  }
  if (ov.threads) {
    if (*ov.threads < 0) fail("--threads must be >= 0");
    cfg.threads = static_cast<int>(*ov.threads);
  }
}

Objective RunConfig::objective() const {
  if (objective_name.empty()) fail("missing 'objective.name'");
  return make_benchmark(objective_name, objective_params);
}

CaseTag RunConfig::tag() const {
  if (!case_tag)
    fail("missing 'case' (one of evolutive_discounted, stationary_discounted, "
         "evolutive_undiscounted)");
  return *case_tag;
}

double RunConfig::required_lambda() const {
  CaseTag c = tag();
  if (c == CaseTag::EvolutiveUndiscounted) {
    if (lambda && *lambda != 0.0)
      fail("case evolutive_undiscounted runs with lambda = 0; drop 'lambda' or set it to 0");
    return 0.0;
  }
  if (!lambda || !(*lambda > 0.0))
    fail("case " + case_name(c) + " requires 'lambda' > 0");
  return *lambda;
}

double RunConfig::required_horizon() const {
  if (!horizon) fail("case " + case_name(tag()) + " requires 'horizon'");
  return *horizon;
}

GridSpec RunConfig::grid(const Objective& obj) const {
  if (!grid_h) fail("grid solve needs 'grid.h'");
  if (obj.dim > 3)
    fail("grid solve supports dimension <= 3; objective '" + obj.name + "' has dimension " +
         std::to_string(obj.dim));
  Box box = grid_box ? *grid_box : obj.domain;
  if (box.dim() != obj.dim)
    fail("grid.box has dimension " + std::to_string(box.dim()) + ", objective '" + obj.name +
         "' has dimension " + std::to_string(obj.dim));
  try {
    return make_grid(box, *grid_h);
  } catch (const std::invalid_argument& e) {
    fail(std::string("grid: ") + e.what());
  }
}

double RunConfig::trajectory_horizon() const {
  CaseTag c = tag();
  double span;
  if (c == CaseTag::StationaryDiscounted) {
    if (horizon) span = *horizon;
    else if (control_steps) span = static_cast<double>(*control_steps) * trajectory_dt();
    else span = truncation / required_lambda();
  } else {
    span = required_horizon();
  }
  if (control_steps) {
    double steps_span = static_cast<double>(*control_steps) * trajectory_dt();
    if (std::abs(steps_span - span) > 1e-9 * std::max(1.0, std::abs(span)))
      fail("control_steps * dt = " + std::to_string(steps_span) +
           " does not match the horizon " + std::to_string(span));
  }
  return span;
}

std::string RunConfig::input_path(const std::string& rel) const {
  namespace fs = std::filesystem;
  fs::path p(rel);
  if (!p.is_absolute() && !config_dir.empty()) p = fs::path(config_dir) / p;
  if (!fs::exists(p)) fail("input file '" + p.string() + "' does not exist");
  return p.string();
}

}  // namespace stabopt::cli
