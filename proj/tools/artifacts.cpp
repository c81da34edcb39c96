#include "artifacts.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "stabopt/io.hpp"

namespace stabopt::cli {

json json_num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0.0 ? "inf" : "-inf";
}

json to_json(const CheckReport& r) {
  json j{{"name", r.name},
         {"measured", json_num(r.measured)},
         {"bound", json_num(r.bound)},
         {"slack", json_num(r.slack)},
         {"kind", r.lower_check ? "lower" : "upper"},
         {"pass", r.pass}};
  if (!r.context.empty()) {
    json c;
    for (const auto& [k, v] : r.context) c[k] = json_num(v);
    j["context"] = c;
  }
  if (!r.location.empty()) j["location"] = r.location;
  return j;
}

json to_json(const Certificate& c) {
  return json{{"epsilon", json_num(c.epsilon)},
              {"raw_gap", json_num(c.raw_gap)},
              {"trajectory_cost", json_num(c.trajectory_cost)},
              {"reference_value", json_num(c.reference_value)},
              {"tail", json_num(c.tail)},
              {"sound", c.sound}};
}

json to_json(const OptimizeResult& r) {
  return json{{"cost", json_num(r.cost)},
              {"iterations", r.iterations},
              {"gradient_norm", json_num(r.gradient_norm)},
              {"converged", r.converged},
              {"budget_exhausted", r.budget_exhausted}};
}

json to_json(const EntryReport& r) {
  return json{{"found", r.found},
              {"tau", json_num(r.tau)},
              {"tube", json_num(r.tube)},
              {"dt_admissible", r.dt_admissible}};
}

json to_json(const ScanRow& r) {
  return json{{"param", json_num(r.param)},
              {"mu", json_num(r.mu)},
              {"bound", json_num(r.bound)},
              {"epsilon", json_num(r.epsilon)},
              {"ratio", json_num(r.ratio)},
              {"certified", r.certified},
              {"failed", r.failed}};
}

json objective_block(const Objective& obj) {
  json j{{"name", obj.name},
         {"dim", obj.dim},
         {"lower_bound", obj.lower_bound},
         {"upper_bound", obj.upper_bound},
         {"sup_norm", obj.sup_norm},
         {"domain", {{"lo", obj.domain.lo}, {"hi", obj.domain.hi}}}};
  if (!obj.params.empty()) j["params"] = obj.params;
  if (obj.minimizers) {
    if (obj.minimizers->kind == MinimizerSet::Kind::WholeDomain) {
      j["minimizers"] = "whole_domain";
    } else {
      json pts = json::array();
      for (const auto& p : obj.minimizers->points) pts.push_back(p);
      j["minimizers"] = pts;
    }
  }
  return j;
}

json constants_block(const Objective& obj, const std::vector<double>& deltas) {
  json c{{"sup_norm", obj.sup_norm},
         {"speed_scale", std::sqrt(6.0 * obj.sup_norm)},
         {"control_cap", control_cap(obj)}};
  if (obj.minimizers && !deltas.empty()) {
    json g;
    for (double d : deltas) g[fmt(d)] = json_num(separation_gap(obj, d, d / 8.0));
    c["separation_gap"] = g;
  }
  return c;
}

json field_block(const ValueField& f, double cfl) {
  return json{{"case", case_name(f.tag)},
              {"lambda", f.lambda},
              {"sigma", f.sigma},
              {"dt", f.dt},
              {"cfl_limit", cfl},
              {"steps", f.steps},
              {"residual", json_num(f.residual)},
              {"stored_slices", f.times.size()},
              {"final_time", f.final_time()},
              {"soundness_tol", f.soundness_tol},
              {"lower_bound_certified", f.lower_bound_certified},
              {"grid_h", f.grid.h},
              {"grid_counts", f.grid.counts},
              {"box", {{"lo", f.grid.box.lo}, {"hi", f.grid.box.hi}}}};
}

json parameters_block(const RunConfig& cfg) {
  json p;
  if (!cfg.objective_name.empty()) {
    p["objective"]["name"] = cfg.objective_name;
    if (!cfg.objective_params.empty()) p["objective"]["params"] = cfg.objective_params;
  }
  if (cfg.case_tag) p["case"] = case_name(*cfg.case_tag);
  if (cfg.lambda) p["lambda"] = *cfg.lambda;
  if (cfg.horizon) p["horizon"] = *cfg.horizon;
  if (cfg.grid_h) {
    p["grid"]["h"] = *cfg.grid_h;
    if (cfg.grid_box)
      p["grid"]["box"] = {{"lo", cfg.grid_box->lo}, {"hi", cfg.grid_box->hi}};
  }
  if (cfg.dt) p["dt"] = *cfg.dt;
  if (cfg.scheme_dt) p["scheme_dt"] = *cfg.scheme_dt;
  if (cfg.control_steps) p["control_steps"] = *cfg.control_steps;
  if (!cfg.delta_list.empty()) p["delta_list"] = cfg.delta_list;
  if (cfg.eta) p["eta"] = *cfg.eta;
  if (!cfg.start_points.empty()) {
    json pts = json::array();
    for (const auto& x : cfg.start_points) pts.push_back(x);
    p["start_points"] = pts;
  }
  if (cfg.field_file) p["field_file"] = *cfg.field_file;
  if (cfg.trajectory_file) p["trajectory_file"] = *cfg.trajectory_file;
  if (cfg.scan_present) {
    if (cfg.scan_parameter) p["scan"]["parameter"] = *cfg.scan_parameter;
    p["scan"]["values"] = cfg.scan_values;
  }
  p["tolerance"] = cfg.tolerance;
  p["eps_target"] = cfg.eps_target;
  p["max_iterations"] = cfg.max_iterations;
  p["truncation"] = cfg.truncation;
  p["bins"] = cfg.bins;
  p["mc_draws"] = cfg.mc_draws;
  p["verify_slack"] = cfg.verify_slack;
  p["seed"] = cfg.seed;
  p["threads"] = cfg.threads;
  p["output_dir"] = cfg.output_dir;
  return p;
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

Manifest::Manifest(const std::string& command, const RunConfig& cfg) : dir_(cfg.output_dir) {
  std::filesystem::create_directories(dir_);
  root_["command"] = command;
  root_["parameters"] = parameters_block(cfg);
  root_["seed"] = cfg.seed;
}

void Manifest::set(const std::string& key, json value) { root_[key] = std::move(value); }

std::string Manifest::add_file(const std::string& role, const std::string& name) {
  if (root_.contains("files") && root_["files"].contains(role))
    throw std::logic_error("manifest role '" + role + "' registered twice");
  if (!names_.insert(name).second)
    throw std::logic_error("manifest file '" + name + "' registered twice");
  root_["files"][role] = name;
  return path(name);
}

void Manifest::add_input(const std::string& role, const std::string& path) {
  root_["inputs"][role] = path;
}

std::string Manifest::write() const {
  std::string p = dir_ + "/manifest.json";
  write_json_file(p, root_);
  return p;
}

}  // namespace stabopt::cli
