#pragma once

#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "run_config.hpp"
#include "stabopt/analysis.hpp"
#include "stabopt/check_report.hpp"
#include "stabopt/control.hpp"
#include "stabopt/value_field.hpp"

namespace stabopt::cli {

using nlohmann::json;

// JSON has no inf/nan literals; non-finite values land as strings so the
// document stays parseable and the value stays readable.
json json_num(double v);

json to_json(const CheckReport& r);
json to_json(const Certificate& c);
json to_json(const OptimizeResult& r);  // trajectory omitted, it has its own file
json to_json(const EntryReport& r);
json to_json(const ScanRow& r);

json objective_block(const Objective& obj);
// Role-named constants the reports depend on: speed_scale sqrt(6 sup|f|),
// control_cap, and the separation gap at each requested delta.
json constants_block(const Objective& obj, const std::vector<double>& deltas);
json field_block(const ValueField& f, double cfl);
// Echo of every configured value, so the manifest alone reproduces the run.
json parameters_block(const RunConfig& cfg);

void write_json_file(const std::string& path, const json& j);
void write_text_file(const std::string& path, const std::string& content);

// Collects the parameter record plus every file the run writes, then lands
// as manifest.json in the output directory. Each file belongs to exactly one
// role and each role to exactly one file.
class Manifest {
 public:
  Manifest(const std::string& command, const RunConfig& cfg);

  void set(const std::string& key, json value);
  // Registers an output file and returns its full path for the writer.
  std::string add_file(const std::string& role, const std::string& name);
  void add_input(const std::string& role, const std::string& path);
  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const { return dir_ + "/" + name; }
  // Writes manifest.json and returns its path.
  std::string write() const;

 private:
  std::string dir_;
  json root_;
  std::set<std::string> names_;
};

}  // namespace stabopt::cli
