#include "stabopt/analysis.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace stabopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double speed_scale(double sup_norm) { return std::sqrt(6.0 * sup_norm); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

double reachability_bound(CaseTag tag, double lambda, double t, double eps, double dist,
                          double sup_norm, double delta) {
  require_positive(delta, "delta");
  if (!(eps >= 0.0) || !(dist >= 0.0) || !(sup_norm >= 0.0))
    throw std::invalid_argument("eps, dist and sup_norm must be nonnegative");
  const double numer = speed_scale(sup_norm) * dist + eps;
  switch (tag) {
    case CaseTag::EvolutiveDiscounted:
      require_positive(lambda, "lambda");
      require_positive(t, "t");
      return lambda / -std::expm1(-lambda * t) * numer / delta;
    case CaseTag::StationaryDiscounted:
      require_positive(lambda, "lambda");
      return lambda * numer / delta;
    case CaseTag::EvolutiveUndiscounted:
      require_positive(t, "t");
      return numer / (t * delta);
  }
  throw std::invalid_argument("unknown case tag");
}

CheckReport check_reachability(const Trajectory& traj, const Objective& obj, double delta,
                               CaseTag tag, double lambda, double t, const Certificate& cert,
                               double rel_slack) {
  if (!cert.sound)
    throw std::invalid_argument("check_reachability refuses an unsound certificate");
  const double lam = tag == CaseTag::EvolutiveUndiscounted ? 0.0 : lambda;
  const double restrict_to = tag == CaseTag::StationaryDiscounted ? 0.0 : t;
  const auto meas = build_measure(traj, measure_case_for(tag), lam, restrict_to);
  const double measured = mass_outside(meas, obj, delta);
  const double dist = distance_to_minimizers(obj, traj.states.front());
  const double bound =
      reachability_bound(tag, lambda, t, cert.epsilon, dist, obj.sup_norm, delta);
  auto report = CheckReport::upper("reachability_mass", measured, bound, rel_slack * bound);
  report.context["delta"] = delta;
  report.context["eps"] = cert.epsilon;
  report.context["dist"] = dist;
  report.context["lambda"] = lam;
  if (tag != CaseTag::StationaryDiscounted) report.context["t"] = t;
  return report;
}

double excursion_bound(CaseTag tag, double lambda, double t, double tau, double delta,
                       double control_bound) {
  require_positive(delta, "delta");
  require_positive(control_bound, "control_bound");
  const double w = delta / (2.0 * control_bound);
  const bool bounded_horizon = tag != CaseTag::StationaryDiscounted;
  if (bounded_horizon) require_positive(t, "t");
  if (!(tau - w > 0.0) || (bounded_horizon && !(tau + w < t)))
    throw std::domain_error("excursion window does not fit inside the time horizon");
  switch (tag) {
    case CaseTag::EvolutiveDiscounted:
      require_positive(lambda, "lambda");
      return lambda * std::exp(-lambda * tau) / -std::expm1(-lambda * t) * delta /
             control_bound;
    case CaseTag::StationaryDiscounted:
      require_positive(lambda, "lambda");
      return lambda * std::exp(-lambda * tau) * delta / control_bound;
    case CaseTag::EvolutiveUndiscounted:
      return delta / (t * control_bound);
  }
  throw std::invalid_argument("unknown case tag");
}

EscapeResult check_escape(const Trajectory& traj, const Objective& obj, double delta,
                          double gap_half, CaseTag tag, double lambda, double t,
                          double control_bound, double slack) {
  require_positive(delta, "delta");
  EscapeResult result;
  result.gap_threshold = gap_half;
  if (!std::isfinite(gap_half)) {
    result.kind = EscapeResult::Kind::NotApplicable;
    return result;
  }
  const double cap = control_bound > 0.0 ? control_bound : control_cap(obj);
  const double t_end =
      tag == CaseTag::StationaryDiscounted ? traj.horizon() : t;
  if (tag != CaseTag::StationaryDiscounted &&
      t > traj.horizon() + 1e-9 * std::max(1.0, traj.horizon()))
    throw std::invalid_argument("check horizon exceeds the trajectory horizon");

  // Earliest sampled excursion whose window fits; remember whether any
  // excursion exists at all so a window that cannot fit is loud, not silent.
  const double window = delta / (2.0 * cap);
  bool any_excursion = false;
  double tau = -1.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double s = static_cast<double>(k) * traj.dt;
    if (s > t_end + 1e-12) break;
    if (!(distance_to_minimizers(obj, traj.states[k]) > delta)) continue;
    any_excursion = true;
    const bool fits =
        s - window > 0.0 &&
        (tag == CaseTag::StationaryDiscounted || s + window < t_end);
    if (fits) { tau = s; break; }
  }
  if (!any_excursion) {
    result.kind = EscapeResult::Kind::NoExcursion;
    return result;
  }
  if (tau < 0.0)
    throw std::domain_error("excursion window does not fit inside the time horizon");

  const double lam = tag == CaseTag::EvolutiveUndiscounted ? 0.0 : lambda;
  const double restrict_to = tag == CaseTag::StationaryDiscounted ? 0.0 : t;
  const auto meas = build_measure(traj, measure_case_for(tag), lam, restrict_to);
  const double measured = mass_outside(meas, obj, gap_half);
  const double bound = excursion_bound(tag, lambda, t_end, tau, delta, cap);

  result.kind = EscapeResult::Kind::Checked;
  result.tau = tau;
  result.report = CheckReport::lower("escape_mass", measured, bound, slack);
  result.report.context["tau"] = tau;
  result.report.context["delta"] = delta;
  result.report.context["gap_half"] = gap_half;
  result.report.context["control_bound"] = cap;
  return result;
}

EntryReport entry_time(const Trajectory& traj, const Objective& obj, double eta,
                       double control_bound) {
  require_positive(eta, "eta");
  const double cap = control_bound > 0.0 ? control_bound : control_cap(obj);
  EntryReport report;
  report.tube = 0.5 * eta;
  report.dt_admissible = traj.dt <= eta / (2.0 * cap) + 1e-12;

  // Last sample violating the half tube; entry is the sample after it.
  // Samples exactly on the tube boundary count as inside, same membership
  // slack as separation_gap.
  std::size_t first_ok = 0;
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    if (distance_to_minimizers(obj, traj.states[k]) > report.tube + 1e-9) first_ok = k + 1;
  if (first_ok >= traj.states.size()) return report;  // never settles
  report.found = true;
  report.tau = static_cast<double>(first_ok) * traj.dt;
  return report;
}

PickedParameters pick_parameters(double gamma_eta, double eps, double dist, double sup_norm) {
  if (!(gamma_eta > 0.0) || !std::isfinite(gamma_eta))
    throw std::invalid_argument("pick_parameters needs a finite positive value gap");
  if (!(eps >= 0.0) || !(dist >= 0.0) || !(sup_norm >= 0.0))
    throw std::invalid_argument("eps, dist and sup_norm must be nonnegative");
  PickedParameters out;
  const double denom = speed_scale(sup_norm) * dist + eps;
  if (denom <= 0.0) {
    // Start on the minimizer set with a perfect certificate: any rate works.
    out.lambda = 0.1;
    out.defaulted = true;
  } else {
    out.lambda = 0.5 * -std::expm1(-1.0) * gamma_eta / denom;
  }
  out.t = 1.0 / out.lambda;
  return out;
}

std::vector<ScanRow> scan(const Objective& obj, const Vec& start, CaseTag tag,
                          const std::vector<double>& params, double delta,
                          const ScanOptions& opts) {
  require_positive(delta, "delta");
  require_positive(opts.dt, "dt");
  if (tag == CaseTag::EvolutiveDiscounted) require_positive(opts.horizon, "horizon");
  if (tag == CaseTag::StationaryDiscounted) require_positive(opts.truncation, "truncation");
  const double dist = distance_to_minimizers(obj, start);

  std::vector<ScanRow> rows;
  rows.reserve(params.size());
  for (double p : params) {
    ScanRow row;
    row.param = p;
    try {
      double lambda = 0.0, t_bound = 0.0, t_run = 0.0;
      switch (tag) {
        case CaseTag::EvolutiveDiscounted:
          lambda = p; t_bound = opts.horizon; t_run = opts.horizon; break;
        case CaseTag::StationaryDiscounted:
          lambda = p; t_bound = 0.0; t_run = opts.truncation / p; break;
        case CaseTag::EvolutiveUndiscounted:
          lambda = 0.0; t_bound = p; t_run = p; break;
      }
      const auto n_steps =
          std::max<long long>(1, std::llround(t_run / opts.dt));
      const double dt = t_run / static_cast<double>(n_steps);

      const auto lb = LowerBoundField::build(obj, lambda, opts.lower_bound);
      const auto warm = rollout_feedback(lb, obj, start, dt, t_run);
      const auto res =
          optimize_direct(obj, start, lambda, t_run, dt, &warm.controls, opts.optimize);
      const auto cert = certify_epsilon(obj, res.trajectory, lb, tag);

      const double restrict_to = tag == CaseTag::StationaryDiscounted ? 0.0 : t_run;
      const auto meas =
          build_measure(res.trajectory, measure_case_for(tag), lambda, restrict_to);
      row.mu = mass_outside(meas, obj, delta);
      row.epsilon = cert.epsilon;
      row.bound = reachability_bound(tag, lambda, t_bound, cert.epsilon, dist,
                                     obj.sup_norm, delta);
      row.ratio = row.bound > 0.0 ? row.mu / row.bound : (row.mu > 0.0 ? kInf : 0.0);
      row.certified =
          cert.sound && (opts.eps_target <= 0.0 || cert.epsilon <= opts.eps_target);
    } catch (const std::exception&) {
      row.failed = true;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stabopt
