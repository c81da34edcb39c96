#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "artifacts.hpp"
#include "stabopt/analysis.hpp"
#include "stabopt/hjb.hpp"
#include "stabopt/io.hpp"
#include "stabopt/lower_bound.hpp"
#include "stabopt/occupation.hpp"
#include "stabopt/parallel.hpp"

namespace stabopt::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Largest step count whose uniform step respects the CFL limit and divides
// the horizon exactly.
double evolutive_dt(double horizon, double cfl) {
  auto n = static_cast<long long>(std::ceil(horizon / cfl - 1e-12));
  return horizon / static_cast<double>(std::max<long long>(1, n));
}

struct FieldSetup {
  ValueField field;
  double cfl = 0.0;
  bool solved = false;
  std::string source;  // input path when loaded
};

FieldSetup solve_field(const RunConfig& cfg, const Objective& obj) {
  FieldSetup fs;
  CaseTag c = cfg.tag();
  double lambda = cfg.required_lambda();
  GridSpec grid = cfg.grid(obj);
  fs.cfl = cfl_limit(grid, scheme_sigma(obj), lambda);
  fs.solved = true;
  if (c == CaseTag::StationaryDiscounted) {
    double dt = cfg.scheme_dt.value_or(fs.cfl);
    fs.field = solve_stationary(obj, lambda, grid, dt, cfg.tolerance);
  } else {
    double T = cfg.required_horizon();
    double dt = cfg.scheme_dt ? *cfg.scheme_dt : evolutive_dt(T, fs.cfl);
    fs.field = solve_evolutive(obj, lambda, grid, T, dt);
  }
  return fs;
}

// Loaded fields were written with full precision, so exact metadata
// agreement is the right test.
FieldSetup load_field(const RunConfig& cfg, const Objective& obj) {
  FieldSetup fs;
  fs.source = cfg.input_path(*cfg.field_file);
  bool binary = fs.source.size() > 4 && fs.source.substr(fs.source.size() - 4) == ".bin";
  fs.field = binary ? ValueField::load_binary(fs.source) : ValueField::load_csv(fs.source);
  CaseTag c = cfg.tag();
  double lambda = cfg.required_lambda();
  if (fs.field.tag != c)
    throw ConfigError("field file holds case " + case_name(fs.field.tag) + ", config says " +
                      case_name(c));
  if (std::abs(fs.field.lambda - lambda) > 1e-12)
    throw ConfigError("field file lambda " + fmt(fs.field.lambda) + " differs from config lambda " +
                      fmt(lambda));
  if (fs.field.grid.dim() != obj.dim)
    throw ConfigError("field file has dimension " + std::to_string(fs.field.grid.dim()) +
                      ", objective '" + obj.name + "' has dimension " + std::to_string(obj.dim));
  fs.cfl = cfl_limit(fs.field.grid, fs.field.sigma, lambda);
  return fs;
}

FieldSetup obtain_field(const RunConfig& cfg, const Objective& obj) {
  return cfg.field_file ? load_field(cfg, obj) : solve_field(cfg, obj);
}

std::optional<LowerBoundField> try_lower_bound(const Objective& obj, double lambda) {
  try {
    return LowerBoundField::build(obj, lambda);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

struct Certified {
  Certificate cert;
  std::string reference;  // "lower_bound" or "grid_field"
  double soundness_tol = 0.0;
  bool on_target = false;  // sound and within eps_target when one is set
};

// Prefers the certified bound: it cannot overestimate, so its epsilon is a
// genuine guarantee, while a grid field is only sound up to its dissipation
// estimate.
Certified certify(const Objective& obj, const Trajectory& traj,
                  const std::optional<LowerBoundField>& lb, const ValueField* field, CaseTag c,
                  double eps_target) {
  Certified out;
  if (lb) {
    out.cert = certify_epsilon(obj, traj, *lb, c);
    out.reference = "lower_bound";
    out.soundness_tol = 1e-9;
  } else if (field) {
    out.cert = certify_epsilon(obj, traj, *field);
    out.reference = "grid_field";
    out.soundness_tol = field->soundness_tol;
  } else {
    throw ConfigError("certification needs a certifiable objective or a 'field_file'");
  }
  out.on_target = out.cert.sound && (eps_target <= 0.0 || out.cert.epsilon <= eps_target);
  return out;
}

void check_starts(const RunConfig& cfg, const Objective& obj) {
  for (std::size_t k = 0; k < cfg.start_points.size(); ++k) {
    const Vec& x = cfg.start_points[k];
    if (static_cast<int>(x.size()) != obj.dim)
      throw ConfigError("start_points[" + std::to_string(k) + "] has dimension " +
                        std::to_string(x.size()) + ", objective '" + obj.name + "' needs " +
                        std::to_string(obj.dim));
    if (!obj.domain.contains(x, 1e-9))
      throw ConfigError("start_points[" + std::to_string(k) + "] lies outside the objective domain");
  }
}

Trajectory load_trajectory(const RunConfig& cfg, const Objective& obj, std::string* source) {
  if (!cfg.trajectory_file) throw ConfigError("this command needs 'trajectory_file'");
  *source = cfg.input_path(*cfg.trajectory_file);
  Trajectory traj = load_trajectory_csv(*source);
  if (traj.dim() != obj.dim)
    throw ConfigError("trajectory has dimension " + std::to_string(traj.dim()) + ", objective '" +
                      obj.name + "' has dimension " + std::to_string(obj.dim));
  double lambda = cfg.required_lambda();
  if (std::abs(traj.lambda - lambda) > 1e-12)
    throw ConfigError("trajectory was written with lambda " + fmt(traj.lambda) +
                      ", config says " + fmt(lambda));
  return traj;
}

double bound_time(CaseTag c, const Trajectory& traj) {
  return c == CaseTag::StationaryDiscounted ? 0.0 : traj.horizon();
}

OccupationMeasure measure_for(const Trajectory& traj, CaseTag c, double lambda) {
  double lam = c == CaseTag::EvolutiveUndiscounted ? 0.0 : lambda;
  double restrict_to = c == CaseTag::StationaryDiscounted ? 0.0 : traj.horizon();
  return build_measure(traj, measure_case_for(c), lam, restrict_to);
}

CheckReport conservation_report(const OccupationMeasure& m) {
  auto r = CheckReport::upper("mass_conservation",
                              std::abs(m.total_mass() + m.tail_mass - 1.0), 0.0, 1e-9);
  r.context["total_mass"] = m.total_mass();
  r.context["tail_mass"] = m.tail_mass;
  return r;
}

CheckReport soundness_report(const Certified& cd) {
  auto r = CheckReport::lower("certificate_sound", cd.cert.raw_gap, 0.0, cd.soundness_tol);
  r.context["epsilon"] = cd.cert.epsilon;
  r.context["tail"] = cd.cert.tail;
  return r;
}

const char* escape_kind_name(EscapeResult::Kind k) {
  switch (k) {
    case EscapeResult::Kind::NoExcursion: return "no_excursion";
    case EscapeResult::Kind::Checked: return "checked";
    case EscapeResult::Kind::NotApplicable: return "not_applicable";
  }
  return "?";
}

struct CheckSet {
  json checks = json::array();
  json escape_kinds = json::array();
  int failures = 0;
  std::vector<double> mu, bound;  // per delta; bound stays NaN when skipped
  std::optional<EntryReport> entry;
};

// The per-trajectory check battery: mass conservation, certificate
// soundness, reachability mass per delta (skipped without a certificate on
// target, its precondition), excursion mass per delta, entry time for eta.
CheckSet run_checks(const Objective& obj, const Trajectory& traj, CaseTag c, double lambda,
                    const Certified& cd, const std::vector<double>& deltas,
                    const std::vector<double>& gap_half, std::optional<double> eta) {
  CheckSet cs;
  cs.mu.assign(deltas.size(), kNaN);
  cs.bound.assign(deltas.size(), kNaN);
  auto add = [&cs](const CheckReport& r) {
    cs.checks.push_back(to_json(r));
    if (!r.pass) ++cs.failures;
  };

  const double t = bound_time(c, traj);
  const auto meas = measure_for(traj, c, lambda);
  add(conservation_report(meas));
  add(soundness_report(cd));

  for (std::size_t i = 0; i < deltas.size(); ++i) {
    double d = deltas[i];
    cs.mu[i] = mass_outside(meas, obj, d);
    if (cd.on_target) {
      auto r = check_reachability(traj, obj, d, c, lambda, t, cd.cert);
      cs.bound[i] = r.bound;
      add(r);
    } else {
      cs.checks.push_back(
          json{{"name", "reachability_mass"}, {"delta", d}, {"skipped", "uncertified"}});
    }
    auto esc = check_escape(traj, obj, d, gap_half[i], c, lambda, t);
    json row{{"delta", d}, {"gap_half", json_num(gap_half[i])},
             {"kind", escape_kind_name(esc.kind)}};
    if (esc.kind == EscapeResult::Kind::Checked) {
      row["tau"] = esc.tau;
      add(esc.report);
    }
    cs.escape_kinds.push_back(row);
  }

  if (eta) {
    auto e = entry_time(traj, obj, *eta);
    cs.entry = e;
    auto r = CheckReport::upper("entry_time",
                                e.found ? e.tau : std::numeric_limits<double>::infinity(),
                                traj.horizon(), 0.0);
    r.context["eta"] = *eta;
    r.context["tube"] = e.tube;
    r.context["dt_admissible"] = e.dt_admissible ? 1.0 : 0.0;
    r.context["found"] = e.found ? 1.0 : 0.0;
    add(r);
  }
  return cs;
}

std::vector<double> escape_gaps(const Objective& obj, const std::vector<double>& deltas) {
  std::vector<double> gaps;
  gaps.reserve(deltas.size());
  for (double d : deltas) gaps.push_back(separation_gap(obj, d / 2.0, d / 16.0));
  return gaps;
}

void print_fail(const json& report) {
  std::fprintf(stderr, "FAIL %s: measured %s vs bound %s\n",
               report.value("name", std::string("?")).c_str(),
               report["measured"].dump().c_str(), report["bound"].dump().c_str());
}

// Index-claiming worker pool. Workers only write their own slots, so the
// worker count never changes any output.
void run_indexed(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_count()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

int optimize_budget(const RunConfig& cfg) {
  return static_cast<int>(std::min<long long>(cfg.max_iterations,
                                              std::numeric_limits<int>::max()));
}

}  // namespace

int cmd_solve(const RunConfig& cfg) {
  Objective obj = cfg.objective();
  Manifest man("solve", cfg);
  FieldSetup fs = solve_field(cfg, obj);
  auto reports = verify_bounds(fs.field, obj, cfg.verify_slack);
  fs.field.save_csv(man.add_file("field", "field.csv"));
  man.set("objective", objective_block(obj));
  man.set("constants", constants_block(obj, cfg.delta_list));
  man.set("scheme", field_block(fs.field, fs.cfl));

  json rows = json::array();
  int failures = 0;
  for (const auto& r : reports) {
    rows.push_back(to_json(r));
    if (!r.pass) {
      ++failures;
      print_fail(rows.back());
    }
  }
  man.set("reports", rows);
  man.set("all_pass", failures == 0);
  std::string mpath = man.write();
  std::printf("solve: %s, %zu nodes, %zu steps, residual %s; bounds %zu/%zu pass; wrote %s\n",
              case_name(fs.field.tag).c_str(), fs.field.grid.total, fs.field.steps,
              fmt(fs.field.residual).c_str(), reports.size() - failures, reports.size(),
              mpath.c_str());
  return failures ? 2 : 0;
}

int cmd_rollout(const RunConfig& cfg) {
  Objective obj = cfg.objective();
  CaseTag c = cfg.tag();
  if (cfg.start_points.empty()) throw ConfigError("rollout needs 'start_points'");
  check_starts(cfg, obj);
  Manifest man("rollout", cfg);
  FieldSetup fs = obtain_field(cfg, obj);
  if (fs.solved) fs.field.save_csv(man.add_file("field", "field.csv"));
  else man.add_input("field", fs.source);

  double dt = cfg.trajectory_dt();
  double T = cfg.trajectory_horizon();
  if (c != CaseTag::StationaryDiscounted && T > fs.field.final_time() + 1e-9 * std::max(1.0, T))
    throw ConfigError("trajectory horizon " + fmt(T) + " exceeds the field's final time " +
                      fmt(fs.field.final_time()));

  json rows = json::array();
  int rc = 0;
  for (std::size_t k = 0; k < cfg.start_points.size(); ++k) {
    Trajectory traj = rollout_feedback(fs.field, obj, cfg.start_points[k], dt, T);
    fill_cost(obj, traj);
    std::string name = "trajectory_" + std::to_string(k) + ".csv";
    save_trajectory_csv(man.add_file("trajectory_" + std::to_string(k), name), traj, obj);
    Certificate cert = certify_epsilon(obj, traj, fs.field);
    json row{{"start", cfg.start_points[k]},
             {"cost", json_num(traj.cost)},
             {"certificate", to_json(cert)}};
    if (!cert.sound) {
      rc = 2;
      std::fprintf(stderr, "FAIL certificate_sound: raw gap %s below -%s\n",
                   fmt(cert.raw_gap).c_str(), fmt(fs.field.soundness_tol).c_str());
    }
    rows.push_back(row);
  }
  man.set("objective", objective_block(obj));
  man.set("constants", constants_block(obj, cfg.delta_list));
  man.set("scheme", field_block(fs.field, fs.cfl));
  man.set("results", rows);
  std::string mpath = man.write();
  std::printf("rollout: %zu trajectories, T=%s, dt=%s; wrote %s\n", cfg.start_points.size(),
              fmt(T).c_str(), fmt(dt).c_str(), mpath.c_str());
  return rc;
}

int cmd_optimize(const RunConfig& cfg) {
  Objective obj = cfg.objective();
  CaseTag c = cfg.tag();
  double lambda = cfg.required_lambda();
  if (cfg.start_points.empty()) throw ConfigError("optimize needs 'start_points'");
  check_starts(cfg, obj);
  Manifest man("optimize", cfg);

  // The certified bound takes precedence for both warm starts and
  // certificates; a field file is only read when no bound builds.
  auto lb = try_lower_bound(obj, lambda);
  FieldSetup fs;
  const ValueField* fieldp = nullptr;
  if (!lb && cfg.field_file) {
    fs = load_field(cfg, obj);
    fieldp = &fs.field;
    man.add_input("field", fs.source);
  }

  double dt = cfg.trajectory_dt();
  double T = cfg.trajectory_horizon();
  OptimizeOptions oo;
  oo.max_iterations = optimize_budget(cfg);

  json rows = json::array();
  int rc = 0;
  for (std::size_t k = 0; k < cfg.start_points.size(); ++k) {
    const Vec& x = cfg.start_points[k];
    // Warm start from the best available feedback; zero signal otherwise.
    std::optional<Trajectory> warm;
    if (lb) warm = rollout_feedback(*lb, obj, x, dt, T);
    else if (fieldp) warm = rollout_feedback(*fieldp, obj, x, dt, T);
    OptimizeResult res =
        optimize_direct(obj, x, lambda, T, dt, warm ? &warm->controls : nullptr, oo);
    std::string name = "trajectory_" + std::to_string(k) + ".csv";
    save_trajectory_csv(man.add_file("trajectory_" + std::to_string(k), name), res.trajectory,
                        obj);
    json row{{"start", x}, {"optimize", to_json(res)}};
    if (lb || fieldp) {
      Certified cd = certify(obj, res.trajectory, lb, fieldp, c, cfg.eps_target);
      row["certificate"] = to_json(cd.cert);
      row["certificate_reference"] = cd.reference;
      row["certified"] = cd.on_target;
      if (!cd.cert.sound) {
        rc = 2;
        std::fprintf(stderr, "FAIL certificate_sound: raw gap %s\n", fmt(cd.cert.raw_gap).c_str());
      }
    }
    rows.push_back(row);
  }
  man.set("objective", objective_block(obj));
  man.set("constants", constants_block(obj, cfg.delta_list));
  man.set("results", rows);
  std::string mpath = man.write();
  std::printf("optimize: %zu trajectories, T=%s, dt=%s, budget %d; wrote %s\n",
              cfg.start_points.size(), fmt(T).c_str(), fmt(dt).c_str(), oo.max_iterations,
              mpath.c_str());
  return rc;
}

int cmd_measure(const RunConfig& cfg) {
  Objective obj = cfg.objective();
  CaseTag c = cfg.tag();
  double lambda = cfg.required_lambda();
  std::string source;
  Trajectory traj = load_trajectory(cfg, obj, &source);
  Manifest man("measure", cfg);
  man.add_input("trajectory", source);

  MeasureCase mc = measure_case_for(c);
  OccupationMeasure meas = measure_for(traj, c, lambda);
  save_measure_csv(man.add_file("measure", "measure.csv"), meas);
  auto masses = histogram(meas, obj.domain, cfg.bins);
  save_histogram_csv(man.add_file("histogram", "histogram.csv"), obj.domain, cfg.bins, masses);

  json checks = json::array();
  int failures = 0;
  auto add = [&](const CheckReport& r) {
    checks.push_back(to_json(r));
    if (!r.pass) {
      ++failures;
      print_fail(checks.back());
    }
  };
  add(conservation_report(meas));

  json results{{"case", measure_case_name(mc)},
               {"total_mass", json_num(meas.total_mass())},
               {"tail_mass", json_num(meas.tail_mass)},
               {"horizon", json_num(meas.horizon)}};
  if (!cfg.delta_list.empty()) {
    json mu;
    for (double d : cfg.delta_list) mu[fmt(d)] = json_num(mass_outside(meas, obj, d));
    results["mass_outside"] = mu;
  }

  if (lambda > 0.0) {
    // Variation distances between the three readings of the same trajectory,
    // each against its closed-form ceiling.
    double t = traj.horizon();
    auto [tv_inf, tv_avg] = tv_bounds(lambda, t);
    auto finite = build_measure(traj, MeasureCase::FiniteDiscounted, lambda, 0.0);
    auto infinite = build_measure(traj, MeasureCase::InfiniteDiscounted, lambda, 0.0);
    auto timeavg = build_measure(traj, MeasureCase::TimeAverage, 0.0, 0.0);
    auto r1 = CheckReport::upper("empirical_tv_vs_infinite",
                                 empirical_tv(finite, infinite, obj.domain, cfg.bins), tv_inf,
                                 1e-6);
    r1.context["lambda"] = lambda;
    r1.context["t"] = t;
    add(r1);
    auto r2 = CheckReport::upper("empirical_tv_vs_time_average",
                                 empirical_tv(finite, timeavg, obj.domain, cfg.bins), tv_avg,
                                 1e-6);
    r2.context["lambda"] = lambda;
    r2.context["t"] = t;
    add(r2);
    results["tv_bound_vs_infinite"] = tv_inf;
    results["tv_bound_vs_time_average"] = tv_avg;
  }

  if (cfg.mc_draws > 0) {
    for (double d : cfg.delta_list) {
      double exact = mass_outside(meas, obj, d);
      double sampled = monte_carlo_check(
          traj, mc, lambda, static_cast<int>(cfg.mc_draws), cfg.seed,
          [&](const Vec& y) { return obj(y) > obj.lower_bound + d; }, obj.domain);
      auto r = CheckReport::upper("monte_carlo_mass", std::abs(sampled - exact), 0.0,
                                  3.0 / std::sqrt(static_cast<double>(cfg.mc_draws)));
      r.context["delta"] = d;
      r.context["draws"] = static_cast<double>(cfg.mc_draws);
      r.context["exact"] = exact;
      r.context["sampled"] = sampled;
      add(r);
    }
  }

  man.set("objective", objective_block(obj));
  man.set("constants", constants_block(obj, cfg.delta_list));
  man.set("results", results);
  man.set("reports", checks);
  man.set("all_pass", failures == 0);
  std::string mpath = man.write();
  std::printf("measure: %s, total mass %s, tail %s; checks %d fail; wrote %s\n",
              measure_case_name(mc), fmt(meas.total_mass()).c_str(), fmt(meas.tail_mass).c_str(),
              failures, mpath.c_str());
  return failures ? 2 : 0;
}

int cmd_check(const RunConfig& cfg) {
  Objective obj = cfg.objective();
  CaseTag c = cfg.tag();
  double lambda = cfg.required_lambda();
  std::string source;
  Trajectory traj = load_trajectory(cfg, obj, &source);
  Manifest man("check", cfg);
  man.add_input("trajectory", source);

  auto lb = try_lower_bound(obj, lambda);
  FieldSetup fs;
  const ValueField* fieldp = nullptr;
  if (!lb && cfg.field_file) {
    fs = load_field(cfg, obj);
    fieldp = &fs.field;
    man.add_input("field", fs.source);
  }
  Certified cd = certify(obj, traj, lb, fieldp, c, cfg.eps_target);

  auto gaps = escape_gaps(obj, cfg.delta_list);
  CheckSet cs = run_checks(obj, traj, c, lambda, cd, cfg.delta_list, gaps, cfg.eta);
  for (const auto& r : cs.checks)
    if (r.contains("pass") && !r["pass"].get<bool>()) print_fail(r);

  json doc{{"certificate", to_json(cd.cert)},
           {"certificate_reference", cd.reference},
           {"certified", cd.on_target},
           {"checks", cs.checks},
           {"escape", cs.escape_kinds}};
  if (cs.entry) doc["entry"] = to_json(*cs.entry);
  write_json_file(man.add_file("checks", "checks.json"), doc);

  man.set("objective", objective_block(obj));
  man.set("constants", constants_block(obj, cfg.delta_list));
  json results{{"failures", cs.failures}, {"certified", cd.on_target},
               {"epsilon", json_num(cd.cert.epsilon)}};
  man.set("results", results);
  man.set("all_pass", cs.failures == 0);
  std::string mpath = man.write();
  std::printf("check: epsilon %s (%s), %d of %zu checks fail; wrote %s\n",
              fmt(cd.cert.epsilon).c_str(), cd.reference.c_str(), cs.failures, cs.checks.size(),
              mpath.c_str());
  return cs.failures ? 2 : 0;
}

int cmd_scan(const RunConfig& cfg) {
  Objective obj = cfg.objective();
  CaseTag c = cfg.tag();
  if (!cfg.scan_present || cfg.scan_values.empty())
    throw ConfigError("scan needs a non-empty 'scan.values' list");
  const char* expect = c == CaseTag::EvolutiveUndiscounted ? "t" : "lambda";
  if (cfg.scan_parameter && *cfg.scan_parameter != expect)
    throw ConfigError(std::string("scan.parameter must be '") + expect + "' for case " +
                      case_name(c));
  if (cfg.start_points.size() != 1)
    throw ConfigError("scan uses exactly one entry in 'start_points'");
  if (cfg.delta_list.size() != 1)
    throw ConfigError("scan uses exactly one entry in 'delta_list'");
  check_starts(cfg, obj);

  ScanOptions so;
  so.dt = cfg.trajectory_dt();
  so.truncation = cfg.truncation;
  so.eps_target = cfg.eps_target;
  so.optimize.max_iterations = optimize_budget(cfg);
  if (c == CaseTag::EvolutiveDiscounted) so.horizon = cfg.required_horizon();

  const double delta = cfg.delta_list.front();
  const Vec& start = cfg.start_points.front();
  std::vector<ScanRow> rows(cfg.scan_values.size());
  run_indexed(rows.size(), [&](std::size_t i) {
    rows[i] = scan(obj, start, c, {cfg.scan_values[i]}, delta, so).front();
  });

  Manifest man("scan", cfg);
  std::ostringstream full, plot;
  full << "param,mu,bound,epsilon,ratio,certified,failed\n";
  plot << "param,mu,bound\n";
  json jrows = json::array();
  int rc = 0;
  bool nonincreasing = true;
  double prev_mu = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    full << fmt(r.param) << ',' << fmt(r.mu) << ',' << fmt(r.bound) << ',' << fmt(r.epsilon)
         << ',' << fmt(r.ratio) << ',' << (r.certified ? 1 : 0) << ',' << (r.failed ? 1 : 0)
         << '\n';
    plot << fmt(r.param) << ',' << fmt(r.mu) << ',' << fmt(r.bound) << '\n';
    jrows.push_back(to_json(r));
    if (r.failed) {
      rc = std::max(rc, 4);
      std::fprintf(stderr, "FAIL scan row param=%s aborted\n", fmt(r.param).c_str());
      continue;
    }
    if (r.certified && r.mu > r.bound * 1.05) {
      rc = std::max(rc, 2);
      std::fprintf(stderr, "FAIL reachability_mass at param=%s: mu %s vs bound %s\n",
                   fmt(r.param).c_str(), fmt(r.mu).c_str(), fmt(r.bound).c_str());
    }
    if (r.mu > prev_mu + 1e-12) nonincreasing = false;
    prev_mu = r.mu;
  }
  write_text_file(man.add_file("scan", "scan.csv"), full.str());
  write_text_file(man.add_file("plot", "scan_plot.csv"), plot.str());
  man.set("objective", objective_block(obj));
  man.set("constants", constants_block(obj, cfg.delta_list));
  man.set("results", json{{"parameter", expect},
                          {"delta", delta},
                          {"rows", jrows},
                          {"mu_nonincreasing", nonincreasing}});
  man.set("all_pass", rc == 0);
  std::string mpath = man.write();
  std::printf("scan: %zu rows over %s, delta %s; wrote %s\n", rows.size(), expect,
              fmt(delta).c_str(), mpath.c_str());
  return rc;
}

int cmd_pipeline(const RunConfig& cfg) {
  Objective obj = cfg.objective();
  CaseTag c = cfg.tag();
  double lambda = cfg.required_lambda();
  if (cfg.start_points.empty()) throw ConfigError("pipeline needs 'start_points'");
  check_starts(cfg, obj);
  Manifest man("pipeline", cfg);

  FieldSetup fs = obtain_field(cfg, obj);
  if (fs.solved) fs.field.save_csv(man.add_file("field", "field.csv"));
  else man.add_input("field", fs.source);
  auto lb = try_lower_bound(obj, lambda);

  double dt = cfg.trajectory_dt();
  double T = cfg.trajectory_horizon();
  if (c != CaseTag::StationaryDiscounted && T > fs.field.final_time() + 1e-9 * std::max(1.0, T))
    throw ConfigError("trajectory horizon " + fmt(T) + " exceeds the field's final time " +
                      fmt(fs.field.final_time()));
  auto gaps = escape_gaps(obj, cfg.delta_list);
  OptimizeOptions oo;
  oo.max_iterations = optimize_budget(cfg);

  struct PointRow {
    bool failed = false;
    std::string error;
    double cost = kNaN;
    double epsilon = kNaN;
    bool certified = false;
    std::vector<double> mu, bound;
    std::optional<EntryReport> entry;
    int failures = 0;
    json doc;
  };
  const std::size_t P = cfg.start_points.size();
  std::vector<PointRow> rows(P);

  // Stage failures stay with their point; the other points keep going.
  run_indexed(P, [&](std::size_t k) {
    PointRow& row = rows[k];
    try {
      const Vec& x = cfg.start_points[k];
      Trajectory warm = rollout_feedback(fs.field, obj, x, dt, T);
      OptimizeResult res = optimize_direct(obj, x, lambda, T, dt, &warm.controls, oo);
      Certified cd = certify(obj, res.trajectory, lb, &fs.field, c, cfg.eps_target);
      CheckSet cs = run_checks(obj, res.trajectory, c, lambda, cd, cfg.delta_list, gaps, cfg.eta);
      save_trajectory_csv(man.path("trajectory_" + std::to_string(k) + ".csv"), res.trajectory,
                          obj);
      save_measure_csv(man.path("measure_" + std::to_string(k) + ".csv"),
                       measure_for(res.trajectory, c, lambda));
      row.cost = res.cost;
      row.epsilon = cd.cert.epsilon;
      row.certified = cd.on_target;
      row.mu = cs.mu;
      row.bound = cs.bound;
      row.entry = cs.entry;
      row.failures = cs.failures;
      row.doc = json{{"optimize", to_json(res)},
                     {"certificate", to_json(cd.cert)},
                     {"certificate_reference", cd.reference},
                     {"certified", cd.on_target},
                     {"checks", cs.checks},
                     {"escape", cs.escape_kinds}};
      if (cs.entry) row.doc["entry"] = to_json(*cs.entry);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });

  int dim = obj.dim;
  std::ostringstream csv;
  csv << "point";
  for (int d = 1; d <= dim; ++d) csv << ",start_" << d;
  csv << ",cost,epsilon,certified";
  for (double d : cfg.delta_list) csv << ",mu_" << fmt(d) << ",bound_" << fmt(d);
  if (cfg.eta) csv << ",entry_tau,entry_found";
  csv << ",check_failures,failed\n";

  json points = json::array();
  int stage_failures = 0, check_failures = 0;
  for (std::size_t k = 0; k < P; ++k) {
    const PointRow& row = rows[k];
    json pt{{"index", k}, {"start", cfg.start_points[k]}};
    if (row.failed) {
      ++stage_failures;
      pt["error"] = row.error;
      std::fprintf(stderr, "point %zu failed: %s\n", k, row.error.c_str());
    } else {
      pt.update(row.doc);
      check_failures += row.failures;
      for (const auto& r : row.doc["checks"])
        if (r.contains("pass") && !r["pass"].get<bool>()) print_fail(r);
      man.add_file("trajectory_" + std::to_string(k),
                   "trajectory_" + std::to_string(k) + ".csv");
      man.add_file("measure_" + std::to_string(k), "measure_" + std::to_string(k) + ".csv");
    }
    points.push_back(pt);

    csv << k;
    for (int d = 0; d < dim; ++d) csv << ',' << fmt(cfg.start_points[k][d]);
    csv << ',' << fmt(row.cost) << ',' << fmt(row.epsilon) << ',' << (row.certified ? 1 : 0);
    for (std::size_t i = 0; i < cfg.delta_list.size(); ++i) {
      csv << ',' << fmt(row.mu.empty() ? kNaN : row.mu[i]);
      csv << ',' << fmt(row.bound.empty() ? kNaN : row.bound[i]);
    }
    if (cfg.eta) {
      bool found = row.entry && row.entry->found;
      csv << ',' << fmt(found ? row.entry->tau : kNaN) << ',' << (found ? 1 : 0);
    }
    csv << ',' << row.failures << ',' << (row.failed ? 1 : 0) << '\n';
  }

  write_json_file(man.add_file("checks", "checks.json"), json{{"points", points}});
  write_text_file(man.add_file("summary", "summary.csv"), csv.str());

  man.set("objective", objective_block(obj));
  man.set("constants", constants_block(obj, cfg.delta_list));
  man.set("scheme", field_block(fs.field, fs.cfl));
  json gap_doc;
  for (std::size_t i = 0; i < cfg.delta_list.size(); ++i)
    gap_doc[fmt(cfg.delta_list[i])] = json_num(gaps[i]);
  man.set("results", json{{"points", P},
                          {"stage_failures", stage_failures},
                          {"check_failures", check_failures},
                          {"escape_gap_half", gap_doc},
                          {"all_pass", stage_failures == 0 && check_failures == 0}});
  std::string mpath = man.write();
  std::printf("pipeline: %zu points, %d stage failures, %d check failures; wrote %s\n", P,
              stage_failures, check_failures, mpath.c_str());
  if (stage_failures) return 4;
  return check_failures ? 2 : 0;
}

int cmd_bench(const RunConfig& cfg) {
  Manifest man("bench", cfg);
  Objective dw = make_benchmark("double_well_1d");
  struct Row {
    std::string name;
    double work = 0.0;
    double checksum = 0.0;
    double ms = 0.0;
  };
  std::vector<Row> rows;
  auto timed = [&rows](const std::string& name, const std::function<std::pair<double, double>()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    auto [work, checksum] = fn();
    auto t1 = std::chrono::steady_clock::now();
    rows.push_back({name, work, checksum,
                    std::chrono::duration<double, std::milli>(t1 - t0).count()});
  };

  GridSpec g = make_grid(dw.domain, 0.01);
  double cfl = cfl_limit(g, scheme_sigma(dw), 0.1);
  timed("solve_evolutive", [&] {
    ValueField f = solve_evolutive(dw, 0.1, g, 1.0, evolutive_dt(1.0, cfl));
    return std::pair{static_cast<double>(f.steps) * static_cast<double>(g.total),
                     f.value_at({0.0}, 1.0)};
  });
  timed("solve_stationary", [&] {
    ValueField f = solve_stationary(dw, 0.1, g, cfl, 1e-6);
    return std::pair{static_cast<double>(f.steps) * static_cast<double>(g.total),
                     f.value_at({0.0})};
  });
  OptimizeResult opt;
  timed("optimize_direct", [&] {
    OptimizeOptions oo;
    oo.max_iterations = 300;
    opt = optimize_direct(dw, {0.0}, 0.1, 10.0, 0.05, nullptr, oo);
    return std::pair{static_cast<double>(opt.iterations) * (10.0 / 0.05), opt.cost};
  });
  timed("build_measure", [&] {
    auto meas = build_measure(opt.trajectory, MeasureCase::InfiniteDiscounted, 0.1);
    return std::pair{static_cast<double>(meas.samples.size()), mass_outside(meas, dw, 0.25)};
  });

  // Wall times go to stdout only; the artifact carries work counts and value
  // checksums, which repeat byte-identically.
  std::ostringstream csv;
  csv << "workload,work_units,checksum\n";
  json jrows = json::array();
  for (const auto& r : rows) {
    csv << r.name << ',' << fmt(r.work) << ',' << fmt(r.checksum) << '\n';
    jrows.push_back(json{{"workload", r.name}, {"work_units", r.work},
                         {"checksum", json_num(r.checksum)}});
    std::printf("bench: %-16s %10.1f ms  (%s work units)\n", r.name.c_str(), r.ms,
                fmt(r.work).c_str());
  }
  write_text_file(man.add_file("bench", "bench.csv"), csv.str());
  man.set("results", json{{"workloads", jrows}});
  std::string mpath = man.write();
  std::printf("bench: wrote %s\n", mpath.c_str());
  return 0;
}

}  // namespace stabopt::cli
