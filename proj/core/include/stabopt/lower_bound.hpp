#ifndef STABOPT_LOWER_BOUND_HPP
#define STABOPT_LOWER_BOUND_HPP

#include <optional>
#include <vector>

#include "stabopt/objective.hpp"

namespace stabopt {

struct LowerBoundOptions {
  // Node spacing of the stored profile/field. The validation residual scales
  // linearly with it and gets divided by lambda in stationary values, so the
  // default is sized for certificates down to lambda ~ 0.01.
  double sample_h = 5e-6;
  double ode_h = 1e-5;      // integration substep
  double seed_radius = 1e-4;
  double safety = 1e-6;     // subtracted from every reported value
};

// Certified pointwise lower bound on the value function, built by integrating
// the stationary equation  lambda*w + |w'|^2/2 = f - fmin  outward from each
// minimizer and taking the pointwise minimum over branches. The result is an
// a.e. exact subsolution, so it sits below the true value function with no
// grid dissipation excess; accuracy is limited only by the ODE step.
//
// Construction paths:
//   dim 1              branches along the axis from every minimizer point
//   dim >= 2, radial   a single radial profile w(|x - source|), minimized
//                      over sources (requires a nondecreasing profile)
//   constant objective w = 0 exactly
// Anything else throws std::invalid_argument.
//
// What is stored is the piecewise-linear interpolant of the branch surface,
// and that interpolant is what gets validated: every interval is checked
// against the inequality with its own chord slope, and the worst residual is
// subtracted from reported values (scaled by the horizon weight), so a
// reported value is a bound for the interpolant actually served, not for the
// ideal branch curve.
//
// Finite-horizon values use the damped form  w(x)*(1 - e^{-c t}) with the
// growth rate c = 0.95 * min f0/w taken over the sample intervals; c*w <= f0
// makes the damped form a subsolution of the time-dependent equation.
class LowerBoundField {
 public:
  static LowerBoundField build(const Objective& obj, double lambda,
                               const LowerBoundOptions& opts = {});

  // Certified bound for the infinite-horizon discounted value at x.
  double stationary_value(const Vec& x) const;

  // Certified bound for the finite-horizon value at (x, t); lambda = 0 at
  // build time gives the undiscounted case.
  double evolutive_value(const Vec& x, double t) const;

  // Gradient of the bound surface, the near-optimal descent feedback.
  Vec feedback_gradient(const Vec& x) const;

  double lambda() const { return lambda_; }
  double growth_rate() const { return growth_rate_; }
  double tolerance() const { return opts_.safety; }
  int dim() const { return dim_; }

  // Largest subsolution residual  lambda*w + |Dw|^2/2 - (f - fmin)  found
  // over the sample intervals during construction. Already accounted for in
  // every reported value.
  double residual() const { return residual_; }

 private:
  LowerBoundField() = default;

  double raw_value(const Vec& x) const;

  int dim_ = 1;
  double lambda_ = 0.0;
  double f_min_ = 0.0;
  double growth_rate_ = 0.0;  // 0 means "no evolutive bound available"
  bool constant_ = false;
  double residual_ = 0.0;
  LowerBoundOptions opts_;

  // dim 1: samples over the domain axis.
  double axis_lo_ = 0.0, axis_h_ = 0.0;
  std::vector<double> axis_values_;

  // dim >= 2: radial profile on [0, r_max].
  std::vector<Vec> sources_;
  double profile_h_ = 0.0;
  std::vector<double> profile_;
};

}  // namespace stabopt

#endif
