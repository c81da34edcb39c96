#pragma once

#include <vector>

#include "stabopt/check_report.hpp"
#include "stabopt/control.hpp"
#include "stabopt/lower_bound.hpp"
#include "stabopt/occupation.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/value_field.hpp"

namespace stabopt {

// Guaranteed ceiling on the occupation mass outside the delta sub-level set
// carried by any eps-optimal trajectory started dist away from the minimizer
// set. With R = sqrt(6 sup_norm):
//   EvolutiveDiscounted    lambda/(1-e^{-lambda t}) * (R dist + eps)/delta
//   StationaryDiscounted   lambda * (R dist + eps)/delta
//   EvolutiveUndiscounted  (R dist + eps)/(t delta)
double reachability_bound(CaseTag tag, double lambda, double t, double eps, double dist,
                          double sup_norm, double delta);

// Builds the case's occupation measure from the trajectory, measures the mass
// outside the delta sub-level set and compares against reachability_bound at
// the trajectory's own start distance and certificate. Refuses trajectories
// without a sound certificate. Slack is relative to the bound.
CheckReport check_reachability(const Trajectory& traj, const Objective& obj, double delta,
                               CaseTag tag, double lambda, double t, const Certificate& cert,
                               double rel_slack = 0.05);

// Guaranteed floor on the occupation mass of the half-gap super-level set
// whenever the trajectory strays more than delta from the minimizer set at
// time tau. The window tau +- delta/(2 M) must fit inside the time horizon
// (only its left end for the stationary case). M is the control magnitude
// bound.
double excursion_bound(CaseTag tag, double lambda, double t, double tau, double delta,
                       double control_bound);

struct EscapeResult {
  enum class Kind { NoExcursion, Checked, NotApplicable };
  Kind kind = Kind::NoExcursion;
  double tau = 0.0;           // excursion time the check ran at
  double gap_threshold = 0.0; // value gap at delta/2 used for the mass
  CheckReport report;         // filled only when kind == Checked
};

// Scans sampled states for dist > delta. No excursion: nothing to check.
// gap_half = separation_gap(obj, delta/2, ...) = +inf (no separation): not
// applicable. Otherwise verifies mass_outside at gap_half is at least
// excursion_bound at the earliest excursion time whose window fits; an
// excursion whose window cannot fit anywhere is an error.
// control_bound 0 derives control_cap(obj).
EscapeResult check_escape(const Trajectory& traj, const Objective& obj, double delta,
                          double gap_half, CaseTag tag, double lambda, double t,
                          double control_bound = 0.0, double slack = 1e-9);

struct EntryReport {
  bool found = false;
  double tau = 0.0;
  double tube = 0.0;          // threshold actually tested at the samples
  bool dt_admissible = false; // dt small enough that the tube covers between samples
};

// Smallest sampled tau such that every sampled state from tau to the end
// stays within eta/2 of the minimizer set. Testing the half tube at the
// samples makes the full eta tube hold between samples whenever
// dt <= eta/(2 M); dt_admissible records that precondition.
EntryReport entry_time(const Trajectory& traj, const Objective& obj, double eta,
                       double control_bound = 0.0);

struct PickedParameters {
  double lambda = 0.0;
  double t = 0.0;
  bool defaulted = false;  // dist = 0 and eps = 0 leave lambda unconstrained
};

// Discount rate making the evolutive reachability bound at delta = gamma_eta
// come out at one half, and the matching horizon t = 1/lambda:
//   lambda = (1-e^{-1})/2 * gamma_eta / (R dist + eps),  R = sqrt(6 sup_norm).
// dist = 0 with eps = 0 has no finite constraint; the default lambda = 0.1 is
// returned with the defaulted flag set.
PickedParameters pick_parameters(double gamma_eta, double eps, double dist, double sup_norm);

struct ScanRow {
  double param = 0.0;      // lambda (discounted cases) or t (undiscounted)
  double mu = 0.0;         // mass outside the delta sub-level set
  double bound = 0.0;      // reachability bound at the certified eps
  double epsilon = 0.0;    // certified suboptimality
  double ratio = 0.0;      // mu / bound
  bool certified = false;
  bool failed = false;     // row aborted; values are unusable
};

struct ScanOptions {
  double dt = 0.05;
  double horizon = 0.0;       // EvolutiveDiscounted horizon; undiscounted rows use param as t
  double truncation = 12.0;   // StationaryDiscounted rows run to truncation/lambda
  double eps_target = 0.0;    // 0: certified means sound; else also eps <= target
  OptimizeOptions optimize;
  LowerBoundOptions lower_bound;
};

// One row per parameter: certified lower bound, feedback rollout, direct
// polish, certificate, occupation mass against the reachability bound. A row
// that throws is marked failed and the scan continues.
std::vector<ScanRow> scan(const Objective& obj, const Vec& start, CaseTag tag,
                          const std::vector<double>& params, double delta,
                          const ScanOptions& opts = {});

}  // namespace stabopt
