#ifndef STABOPT_HJB_HPP
#define STABOPT_HJB_HPP

#include <vector>

#include "stabopt/check_report.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/value_field.hpp"

namespace stabopt {

struct SolveOptions {
  // Evolutive: store every keep_every-th slice (0 = auto, about 256 slices).
  // Slice 0 and the final slice are always stored.
  std::size_t keep_every = 0;
  std::size_t max_steps = 50'000'000;
};

// Maximal marching step that keeps the scheme monotone on this grid:
// hmin / (n*sigma + lambda*hmin). The discount term sits on the diagonal of
// the update, so it tightens the limit slightly for lambda > 0.
double cfl_limit(const GridSpec& grid, double sigma, double lambda = 0.0);

// Dissipation coefficient used by the scheme.
double scheme_sigma(const Objective& obj);

// Finite-horizon solve of  du/dt + lambda*u + |Du|^2/2 = f,  u(x,0) = 0,
// by explicit marching with the dissipative two-sided difference Hamiltonian
//   H(p+, p-) = |(p+ + p-)/2|^2 / 2 - sigma/2 * sum_d (p_d+ - p_d-).
// One-sided differences at faces. lambda = 0 gives the undiscounted case.
// dt must satisfy the CFL limit and divide the horizon.
ValueField solve_evolutive(const Objective& obj, double lambda, const GridSpec& grid,
                           double horizon, double dt, const SolveOptions& opts = {});

// Stationary solve of  lambda*u + |Du|^2/2 = f  by marching the evolutive
// scheme until sup |u_new - u| / dt < tol. Throws on divergence or when
// max_steps is exhausted before convergence (last residuals in the message).
ValueField solve_stationary(const Objective& obj, double lambda, const GridSpec& grid,
                            double dt, double tol, const SolveOptions& opts = {});

// A-priori bound checks on a solved field, one report per clause:
//   sup_bound     lambda*|u| <= sup|f|            (discounted)
//   rate_bound    |du/dt| <= sup|f|               (evolutive, stored slices)
//   grad_bound    |Du| <= sqrt(6 sup|f|)          (interior nodes)
//   sandwich      fmin*w(t) <= u <= f(x)*w(t)     with w(t) = (1-e^{-lambda t})/lambda
// Reporting only; failures set pass=false and name the worst node.
std::vector<CheckReport> verify_bounds(const ValueField& field, const Objective& obj,
                                       double slack);

}  // namespace stabopt

#endif
