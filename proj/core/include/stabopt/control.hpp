#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stabopt/lower_bound.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/value_field.hpp"

namespace stabopt {

// Piecewise-constant control on a uniform step, with the exact piecewise
// linear state response. states has one more entry than controls.
struct Trajectory {
  double dt = 0.0;
  double lambda = 0.0;
  std::vector<Vec> states;
  std::vector<Vec> controls;
  double cost = std::numeric_limits<double>::quiet_NaN();

  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  std::size_t steps() const { return controls.size(); }
  double horizon() const { return dt * static_cast<double>(controls.size()); }
  // Piecewise-linear interpolation of the state path.
  Vec state_at(double s) const;
};

// Runs the dynamics y' = alpha from start, clamping each step to the box.
Trajectory integrate(const Vec& start, const std::vector<Vec>& controls, double dt,
                     const Box& box, double lambda);

// Discounted running cost of the trajectory. The control energy term
// integrates exactly against exp(-lambda s); the state cost term uses a
// 3-point Gauss rule per step. This quadrature IS the objective that
// optimize_direct differentiates, so its gradients match to machine
// precision.
double trajectory_cost(const Objective& obj, const Trajectory& traj);
void fill_cost(const Objective& obj, Trajectory& traj);

// Control magnitude cap used by rollouts and the optimizer projection.
double control_cap(const Objective& obj);

// Closed-loop rollout alpha = -grad(value). Evolutive fields are queried at
// the remaining time, so the feedback shuts off as the horizon runs out;
// stationary fields need an explicit horizon (pick ~25/lambda to make the
// discounted tail negligible). Controls are capped at control_cap.
Trajectory rollout_feedback(const ValueField& field, const Objective& obj, const Vec& start,
                            double dt, double horizon);
Trajectory rollout_feedback(const LowerBoundField& lb, const Objective& obj, const Vec& start,
                            double dt, double horizon);

struct OptimizeOptions {
  int max_iterations = 600;
  double tolerance = 1e-9;       // sup-norm of the projected gradient step
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 45;
  double control_bound = 0.0;    // 0 derives control_cap(obj)
};

struct OptimizeResult {
  Trajectory trajectory;
  double cost = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;    // sup norm at the final iterate
  bool converged = false;
  bool budget_exhausted = false;
};

// Exact gradient of trajectory_cost by backward accumulation through the
// step recursion. Coordinates pinned by the box clamp propagate zero
// sensitivity.
std::vector<Vec> cost_gradient(const Objective& obj, const Trajectory& traj);

// Projected gradient descent with Armijo backtracking on the discretized
// cost. init_controls null means start from the zero signal; a start on an
// unstable equilibrium gives a vanishing gradient, so a vanishing initial
// gradient gets a one-sided 1e-6 nudge on the first control to break the tie.
OptimizeResult optimize_direct(const Objective& obj, const Vec& start, double lambda,
                               double horizon, double dt,
                               const std::vector<Vec>* init_controls = nullptr,
                               const OptimizeOptions& opts = {});

struct Certificate {
  double epsilon = 0.0;          // certified suboptimality, clamped at 0
  double raw_gap = 0.0;          // trajectory_cost + tail - reference, unclamped
  double trajectory_cost = 0.0;
  double reference_value = 0.0;  // value the gap is measured against
  double tail = 0.0;             // infinite-horizon completion term, cases with one
  bool sound = true;             // false when raw_gap is materially negative
};

// Measures the trajectory against a grid field. Stationary fields complete
// the truncated cost with the worst-case tail (sup f / lambda) e^{-lambda T}.
// A raw gap below -field.soundness_tol marks the certificate unsound instead
// of silently clamping.
Certificate certify_epsilon(const Objective& obj, const Trajectory& traj,
                            const ValueField& field);

// Same against the certified lower bound, which cannot overestimate, so
// epsilon here is a genuine guarantee up to quadrature error.
Certificate certify_epsilon(const Objective& obj, const Trajectory& traj,
                            const LowerBoundField& lb, CaseTag tag);

// Columns: s, state, control, objective value, distance to the minimizer
// set, discount weight. The final row repeats the last control so every row
// has the same width.
void save_trajectory_csv(const std::string& path, const Trajectory& traj, const Objective& obj);
Trajectory load_trajectory_csv(const std::string& path);

}  // namespace stabopt
