// Acceptance gate: one line per criterion, exit code = number of failures.
// Each criterion states its tolerance and wall-clock budget up front and is
// checked against frozen reference numbers, so a red line points at exactly
// one quantitative claim.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dp_oracle.hpp"
#include "stabopt/analysis.hpp"
#include "stabopt/control.hpp"
#include "stabopt/hjb.hpp"
#include "stabopt/lower_bound.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/occupation.hpp"

using namespace stabopt;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
  int id;
  std::string label;
  double budget_s;
  Clock::time_point started = Clock::now();
  double carried_s = 0.0;  // work done for this criterion before its clock started
  bool ok = true;
  std::string detail;

  Criterion(int id_, std::string label_, double budget)
      : id(id_), label(std::move(label_)), budget_s(budget) {}

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }

  void note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }

  void finish() {
    double secs = carried_s + std::chrono::duration<double>(Clock::now() - started).count();
    if (secs > budget_s) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    std::printf("[%s] criterion %d: %s (%.1fs of %.0fs)%s%s\n", ok ? "PASS" : "FAIL", id,
                label.c_str(), secs, budget_s, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ValueField march(const Objective& obj, double lambda, double h, double T) {
  GridSpec g = make_grid(obj.domain, h);
  double cfl = cfl_limit(g, scheme_sigma(obj), lambda);
  auto n = static_cast<std::size_t>(std::ceil(T / cfl - 1e-12));
  return solve_evolutive(obj, lambda, g, T, T / static_cast<double>(n));
}

// 1: the scheme reproduces the one case with a closed form, at every grid
// node and every stored time.
void criterion_constant_closed_form() {
  Criterion c(1, "constant objective matches 1-e^{-t} within 1e-3", 5.0);
  Objective cst = make_benchmark("constant");
  ValueField f = march(cst, 1.0, 0.01, 5.0);
  double worst = 0.0;
  for (std::size_t s = 0; s < f.values.size(); ++s) {
    double exact = 1.0 - std::exp(-f.times[s]);
    for (double v : f.values[s]) worst = std::max(worst, std::abs(v - exact));
  }
  c.require(worst <= 1e-3, "max error " + num(worst) + " > 1e-3");
  c.note("max error " + num(worst));
  c.finish();
}

// 2: a-priori bounds on solved fields at h = 0.005, lambda = 0.1. The
// stationary field carries the sup and gradient clauses; the rate and
// sandwich clauses are read off a T = 2 evolutive companion, short enough
// that the scheme's O(h) dissipation excess fits inside the 0.05 slack. On
// the stationary field that excess accumulates to the first-order floor
// 2 P D / lambda (D = sigma h / 2, P the decay rate set by the well
// curvature), so its sandwich clause is instead checked to sit within 10
// percent of that predicted floor.
void criterion_bound_suite() {
  Criterion c(2, "a-priori bound clauses at h=0.005", 60.0);
  Objective dw = make_benchmark("double_well_1d");
  GridSpec g = make_grid(dw.domain, 0.005);

  ValueField st =
      solve_stationary(dw, 0.1, g, 0.999 * cfl_limit(g, scheme_sigma(dw), 0.1), 1e-6);
  auto sreports = verify_bounds(st, dw, 1e-6);
  double sandwich_st = 0.0;
  for (const auto& r : sreports) {
    if (r.name == "sup_bound")
      c.require(r.pass, "sup_bound " + num(r.measured) + " > " + num(r.bound));
    if (r.name == "grad_bound")
      c.require(r.measured <= r.bound + 0.1, "grad_bound " + num(r.measured));
    if (r.name == "sandwich") sandwich_st = r.measured;
  }

  ValueField ev = march(dw, 0.1, 0.005, 2.0);
  double sandwich_ev = 0.0;
  for (const auto& r : verify_bounds(ev, dw, 0.05)) {
    if (r.name == "sup_bound") c.require(r.measured <= r.bound + 1e-6, "evolutive sup_bound");
    if (r.name == "rate_bound")
      c.require(r.measured <= r.bound + 0.05, "rate_bound " + num(r.measured));
    if (r.name == "grad_bound") c.require(r.measured <= r.bound + 0.1, "evolutive grad_bound");
    if (r.name == "sandwich") {
      sandwich_ev = r.measured;
      c.require(r.pass, "evolutive sandwich " + num(r.measured) + " > 0.05");
    }
  }

  double q = 4.0;  // curvature of the well at its minimizers
  double P = (-0.1 + std::sqrt(0.01 + 8.0 * q)) / 4.0;
  double predicted = 2.0 * P * (st.sigma * 0.005 / 2.0) / 0.1;
  c.require(std::abs(sandwich_st / predicted - 1.0) <= 0.1,
            "stationary sandwich excess " + num(sandwich_st) + " vs predicted " +
                num(predicted));
  c.note("evolutive sandwich " + num(sandwich_ev) + ", stationary excess " + num(sandwich_st) +
         " ~ " + num(predicted));
  c.finish();
}

// 3: the grid solver against an independent dynamic-programming oracle at
// the hill start, within 0.05 at h = 0.002. At h = 0.005 the gap is
// dominated by the scheme's first-order dissipation and must sit in
// [0.05, 0.15]; pinning that band documents why the finer grid is the one
// that meets 0.05.
void criterion_dp_cross_validation() {
  Criterion c(3, "grid value vs dynamic-programming oracle", 120.0);
  Objective dw = make_benchmark("double_well_1d");
  dporacle::Config cfg;
  double ref = dporacle::value([&](double x) { return dw(Vec{x}); }, cfg, 0.0);
  c.require(std::abs(ref - 0.9550032665) <= 1e-8, "oracle drifted: " + num(ref));

  double fine = march(dw, 0.1, 0.002, 20.0).value_at({0.0}, 20.0);
  double coarse = march(dw, 0.1, 0.005, 20.0).value_at({0.0}, 20.0);
  double gap_fine = std::abs(fine - ref);
  double gap_coarse = std::abs(coarse - ref);
  c.require(gap_fine <= 0.05, "h=0.002 gap " + num(gap_fine) + " > 0.05");
  c.require(gap_coarse >= 0.05 && gap_coarse <= 0.15,
            "h=0.005 dissipation gap " + num(gap_coarse) + " outside [0.05, 0.15]");
  c.note("gap(h=0.002) = " + num(gap_fine) + ", gap(h=0.005) = " + num(gap_coarse));
  c.finish();
}

// Shared by criteria 4 and 5: certified trajectories for the shrinking
// discounts, computed once. Criterion 5 carries the compute time.
struct TrioRow {
  double lambda = 0.0;
  Certificate cert;
  double mu = 0.0, bound = 0.0;
  std::string error;
};

struct TrioData {
  std::vector<TrioRow> rows;
  double seconds = 0.0;
  bool ran = false;
};
TrioData g_trio;

void ensure_trio() {
  if (g_trio.ran) return;
  auto t0 = Clock::now();
  Objective dw = make_benchmark("double_well_1d");
  for (double lambda : {0.05, 0.02, 0.01}) {
    TrioRow row;
    row.lambda = lambda;
    try {
      LowerBoundField lb = LowerBoundField::build(dw, lambda);
      OptimizeOptions o;
      o.max_iterations = 8000;
      OptimizeResult r = optimize_direct(dw, {0.0}, lambda, 12.0 / lambda, 0.05, nullptr, o);
      row.cert = certify_epsilon(dw, r.trajectory, lb, CaseTag::StationaryDiscounted);
      OccupationMeasure m = build_measure(r.trajectory, MeasureCase::InfiniteDiscounted, lambda);
      row.mu = mass_outside(m, dw, 0.25);
      row.bound = reachability_bound(CaseTag::StationaryDiscounted, lambda, 0.0,
                                     row.cert.epsilon, 1.0, dw.sup_norm, 0.25);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    g_trio.rows.push_back(row);
  }
  g_trio.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  g_trio.ran = true;
}

// 4: no certificate in the suite dips below its reference by more than the
// quadrature slack. The certified lower bound must never overestimate.
void criterion_certificate_floor() {
  ensure_trio();
  Criterion c(4, "certificates never undercut their reference by more than 1e-3", 60.0);
  Objective dw = make_benchmark("double_well_1d");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& row : g_trio.rows) {
    c.require(row.error.empty(), "lambda " + num(row.lambda) + ": " + row.error);
    if (!row.error.empty()) continue;
    worst = std::min(worst, row.cert.raw_gap);
    c.require(row.cert.raw_gap >= -1e-3,
              "lambda " + num(row.lambda) + ": raw gap " + num(row.cert.raw_gap));
  }

  LowerBoundField lb01 = LowerBoundField::build(dw, 0.1);
  OptimizeResult r01 = optimize_direct(dw, {0.0}, 0.1, 20.0, 0.05);
  Certificate c01 = certify_epsilon(dw, r01.trajectory, lb01, CaseTag::StationaryDiscounted);
  c.require(c01.raw_gap >= -1e-3, "lambda 0.1 raw gap " + num(c01.raw_gap));
  worst = std::min(worst, c01.raw_gap);

  LowerBoundField lb0 = LowerBoundField::build(dw, 0.0);
  OptimizeResult r0 = optimize_direct(dw, {0.0}, 0.0, 10.0, 0.05);
  Certificate c0 = certify_epsilon(dw, r0.trajectory, lb0, CaseTag::EvolutiveUndiscounted);
  c.require(c0.raw_gap >= -1e-3, "undiscounted raw gap " + num(c0.raw_gap));
  worst = std::min(worst, c0.raw_gap);
  c.note("smallest raw gap " + num(worst));
  c.finish();
}

// 5: certified eps <= 0.01 trajectories down to lambda = 0.01, with the
// occupation mass outside the 0.25 sub-level set under its reachability
// ceiling (5 percent headroom) and shrinking along with lambda.
void criterion_certified_trio() {
  ensure_trio();
  Criterion c(5, "certified 0.01-optimal trajectories, lambda down to 0.01", 300.0);
  c.carried_s = g_trio.seconds;
  double prev_mu = std::numeric_limits<double>::infinity();
  for (const auto& row : g_trio.rows) {
    std::string tag = "lambda " + num(row.lambda);
    c.require(row.error.empty(), tag + ": " + row.error);
    if (!row.error.empty()) continue;
    c.require(row.cert.sound, tag + ": unsound certificate");
    c.require(row.cert.epsilon <= 0.01, tag + ": eps " + num(row.cert.epsilon) + " > 0.01");
    c.require(row.mu <= 1.05 * row.bound, tag + ": mass " + num(row.mu) + " above bound");
    c.require(row.mu < prev_mu, tag + ": mass not decreasing");
    prev_mu = row.mu;
    c.note(tag + ": eps " + num(row.cert.epsilon) + ", mass " + num(row.mu) +
           " <= " + num(row.bound));
  }
  c.finish();
}

// 6: parameters picked from the separation gap at eta = 0.1 stabilize the
// synthesized trajectory into the 0.1 tube from a finite entry time onward.
void criterion_picked_parameters_stabilize() {
  Criterion c(6, "picked discount stabilizes into the 0.1 tube", 300.0);
  Objective dw = make_benchmark("double_well_1d");
  double gamma = separation_gap(dw, 0.1, 0.025);
  c.require(std::abs(gamma - 0.0361) <= 1e-9, "gamma(0.1) drifted: " + num(gamma));

  PickedParameters p = pick_parameters(gamma, 0.0, 1.0, dw.sup_norm);
  c.require(!p.defaulted, "picker fell back to its default");
  c.require(p.t > 0.0 && std::isfinite(p.t), "no finite horizon");

  auto steps = static_cast<std::size_t>(std::llround(p.t / 0.05));
  double dt = p.t / static_cast<double>(steps);
  OptimizeOptions o;
  o.max_iterations = 2000;
  OptimizeResult r = optimize_direct(dw, {0.0}, p.lambda, p.t, dt, nullptr, o);
  EntryReport entry = entry_time(r.trajectory, dw, 0.2);
  c.require(entry.found, "no entry time");
  c.require(entry.tau < p.t, "entry after the horizon");
  double worst = 0.0;
  for (std::size_t k = 0; k < r.trajectory.states.size(); ++k)
    if (static_cast<double>(k) * dt >= entry.tau)
      worst = std::max(worst, distance_to_minimizers(dw, r.trajectory.states[k]));
  c.require(worst <= 0.1 + 1e-12, "tube violated after entry: " + num(worst));
  c.note("lambda " + num(p.lambda) + ", t " + num(p.t) + ", entry " + num(entry.tau) +
         ", worst distance after entry " + num(worst));
  c.finish();
}

// 7: a hand-built excursion must carry at least the guaranteed occupation
// mass at the half-gap level in all three cases, and a resting trajectory
// must not trigger the check at all.
void criterion_adversarial_excursions() {
  Criterion c(7, "excursion mass floors on an adversarial dip", 10.0);
  Objective dw = make_benchmark("double_well_1d");
  double gap_half = separation_gap(dw, 0.25, 0.0625);

  auto dip = [&](double horizon, double lambda) {
    double dt = 0.05;
    auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    std::vector<Vec> a(steps, Vec{0.0});
    for (std::size_t k = 0; k < steps; ++k) {
      double s = static_cast<double>(k) * dt;
      if (s >= 5.0 && s < 5.6)
        a[k] = {-1.0};
      else if (s >= 5.6 && s < 6.2)
        a[k] = {1.0};
    }
    return integrate({1.0}, a, dt, dw.domain, lambda);
  };

  struct Setup {
    CaseTag tag;
    double lambda, horizon;
    const char* name;
  };
  for (const Setup& s : {Setup{CaseTag::EvolutiveUndiscounted, 0.0, 10.0, "time-average"},
                         Setup{CaseTag::EvolutiveDiscounted, 0.1, 10.0, "finite"},
                         Setup{CaseTag::StationaryDiscounted, 0.1, 100.0, "infinite"}}) {
    Trajectory tr = dip(s.horizon, s.lambda);
    EscapeResult r = check_escape(tr, dw, 0.5, gap_half, s.tag, s.lambda, s.horizon);
    c.require(r.kind == EscapeResult::Kind::Checked, std::string(s.name) + ": no check ran");
    if (r.kind != EscapeResult::Kind::Checked) continue;
    c.require(r.report.pass, std::string(s.name) + ": measured " + num(r.report.measured) +
                                 " under floor " + num(r.report.bound));
    c.note(std::string(s.name) + " " + num(r.report.measured) + " >= " + num(r.report.bound));
  }

  std::vector<Vec> rest(200, Vec{0.0});
  Trajectory still = integrate({1.0}, rest, 0.05, dw.domain, 0.0);
  EscapeResult r =
      check_escape(still, dw, 0.5, gap_half, CaseTag::EvolutiveUndiscounted, 0.0, 10.0);
  c.require(r.kind == EscapeResult::Kind::NoExcursion, "resting path flagged an excursion");
  c.finish();
}

// 8: the three measure readings of one trajectory agree within their
// closed-form variation bounds, and a Monte Carlo draw agrees with the
// direct mass within the usual 3/sqrt(n) band.
void criterion_measure_comparisons() {
  Criterion c(8, "measure variation bounds and Monte Carlo cross-check", 60.0);
  Objective dw = make_benchmark("double_well_1d");
  OptimizeResult res = optimize_direct(dw, {0.0}, 0.5, 50.0, 0.05);
  const Trajectory& tr = res.trajectory;

  OccupationMeasure ginf = build_measure(tr, MeasureCase::InfiniteDiscounted, 0.5);
  double drift = std::abs(ginf.total_mass() + ginf.tail_mass - 1.0);
  c.require(drift <= 1e-9, "mass not normalized: off by " + num(drift));

  for (double t : {2.0, 4.0, 8.0}) {
    OccupationMeasure gt = build_measure(tr, MeasureCase::FiniteDiscounted, 0.5, t);
    OccupationMeasure gu = build_measure(tr, MeasureCase::TimeAverage, 0.0, t);
    auto bounds = tv_bounds(0.5, t);
    double tv1 = empirical_tv(gt, ginf, dw.domain, 50);
    double tv2 = empirical_tv(gt, gu, dw.domain, 50);
    c.require(tv1 <= bounds.first,
              "t=" + num(t) + ": tv to infinite " + num(tv1) + " > " + num(bounds.first));
    c.require(tv2 <= bounds.second,
              "t=" + num(t) + ": tv to average " + num(tv2) + " > " + num(bounds.second));
    c.note("t=" + num(t) + ": " + num(tv1) + "/" + num(bounds.first) + ", " + num(tv2) + "/" +
           num(bounds.second));
  }

  auto in_well = [&](const Vec& y) { return distance_to_minimizers(dw, y) <= 0.25; };
  double ms = measure_set(ginf, in_well);
  double mc = monte_carlo_check(tr, MeasureCase::InfiniteDiscounted, 0.5, 100000, 20260816u,
                                in_well, dw.domain);
  c.require(std::abs(ms - mc) <= 3.0 / std::sqrt(100000.0),
            "monte carlo off by " + num(std::abs(ms - mc)));
  c.note("well mass " + num(ms) + " vs monte carlo " + num(mc));
  c.finish();
}

// 9: the three case formulas collapse onto each other in their shared
// limits, so the case split is consistent across both bound families.
void criterion_case_limits() {
  Criterion c(9, "case formulas agree in their limits", 5.0);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  double t = 100.0;

  double r1 = reachability_bound(CaseTag::EvolutiveDiscounted, 0.4, t, 0.02, 1.0, 1.0, 0.25);
  double r2 = reachability_bound(CaseTag::StationaryDiscounted, 0.4, t, 0.02, 1.0, 1.0, 0.25);
  c.require(rel(r1, r2) <= 1e-6, "reachability at lambda t = 40: rel " + num(rel(r1, r2)));
  double r3 = reachability_bound(CaseTag::EvolutiveDiscounted, 1e-6, t, 0.02, 1.0, 1.0, 0.25);
  double r4 = reachability_bound(CaseTag::EvolutiveUndiscounted, 0.0, t, 0.02, 1.0, 1.0, 0.25);
  c.require(rel(r3, r4) <= 1e-4, "reachability at lambda t = 1e-4: rel " + num(rel(r3, r4)));

  double e1 = excursion_bound(CaseTag::EvolutiveDiscounted, 0.4, t, 30.0, 0.5, 3.45);
  double e2 = excursion_bound(CaseTag::StationaryDiscounted, 0.4, t, 30.0, 0.5, 3.45);
  c.require(rel(e1, e2) <= 1e-6, "excursion at lambda t = 40: rel " + num(rel(e1, e2)));
  double e3 = excursion_bound(CaseTag::EvolutiveDiscounted, 1e-6, t, 30.0, 0.5, 3.45);
  double e4 = excursion_bound(CaseTag::EvolutiveUndiscounted, 0.0, t, 30.0, 0.5, 3.45);
  c.require(rel(e3, e4) <= 1e-4, "excursion at lambda t = 1e-4: rel " + num(rel(e3, e4)));
  c.note("discount-to-undiscounted rel " + num(rel(r3, r4)) + " and " + num(rel(e3, e4)));
  c.finish();
}

}  // namespace

int main() {
  criterion_constant_closed_form();
  criterion_bound_suite();
  criterion_dp_cross_validation();
  criterion_certificate_floor();
  criterion_certified_trio();
  criterion_picked_parameters_stabilize();
  criterion_adversarial_excursions();
  criterion_measure_comparisons();
  criterion_case_limits();
  if (g_failures == 0)
    std::printf("acceptance: all 9 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures;
}
