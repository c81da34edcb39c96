#include "stabopt/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "stabopt/io.hpp"
#include "stabopt/parallel.hpp"

namespace stabopt {

double scheme_sigma(const Objective& obj) { return std::sqrt(6.0 * obj.sup_norm); }

double cfl_limit(const GridSpec& grid, double sigma, double lambda) {
  double hmin = *std::min_element(grid.h.begin(), grid.h.end());
  return hmin / (static_cast<double>(grid.dim()) * sigma + lambda * hmin);
}

namespace {

struct Stepper {
  const GridSpec& g;
  const std::vector<double>& f;
  double lambda, dt, sigma;

  // One explicit step; returns sup |u_new - u| and the largest |u_new|.
  std::pair<double, double> advance(const std::vector<double>& u, std::vector<double>& out) const {
    int n = g.dim();
    std::size_t total = g.total;
    std::vector<double> chunk_diff(thread_count() > 1 ? total : 0);

    if (n == 1) {
      const double h = g.h[0];
      const std::size_t N = total;
      parallel_for(N, [&](std::size_t i) {
        double pp, pm;
        if (i + 1 < N) pp = (u[i + 1] - u[i]) / h;
        else pp = (u[i] - u[i - 1]) / h;
        if (i > 0) pm = (u[i] - u[i - 1]) / h;
        else pm = pp;
        if (i + 1 == N) pp = pm;
        double pbar = 0.5 * (pp + pm);
        double ham = 0.5 * pbar * pbar - 0.5 * sigma * (pp - pm);
        out[i] = u[i] + dt * (f[i] - lambda * u[i] - ham);
      });
    } else {
      parallel_for(total, [&](std::size_t flat) {
        double sq = 0.0, diss = 0.0;
        for (int d = 0; d < n; ++d) {
          std::size_t i = (flat / g.stride[d]) % g.counts[d];
          double pp, pm;
          if (i + 1 < g.counts[d]) pp = (u[flat + g.stride[d]] - u[flat]) / g.h[d];
          else pp = (u[flat] - u[flat - g.stride[d]]) / g.h[d];
          if (i > 0) pm = (u[flat] - u[flat - g.stride[d]]) / g.h[d];
          else pm = pp;
          if (i + 1 == g.counts[d]) pp = pm;
          double pbar = 0.5 * (pp + pm);
          sq += pbar * pbar;
          diss += pp - pm;
        }
        double ham = 0.5 * sq - 0.5 * sigma * diss;
        out[flat] = u[flat] + dt * (f[flat] - lambda * u[flat] - ham);
      });
    }

    double diff = 0.0, mag = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      diff = std::max(diff, std::abs(out[i] - u[i]));
      mag = std::max(mag, std::abs(out[i]));
    }
    return {diff, mag};
  }
};

std::vector<double> sample_objective(const Objective& obj, const GridSpec& grid) {
  std::vector<double> f(grid.total);
  parallel_for(grid.total, [&](std::size_t i) { f[i] = obj.eval(grid.node(i)); });
  return f;
}

void check_cfl(const GridSpec& grid, double sigma, double lambda, double dt) {
  double limit = cfl_limit(grid, sigma, lambda);
  if (dt > limit * (1.0 + 1e-12))
    throw std::invalid_argument("hjb: dt violates the stability limit, maximal admissible dt = " + fmt(limit));
}

// Positive-curvature part of the discrete Laplacian, the rate at which the
// dissipation term pumps value into convex regions. Used to size the
// soundness tolerance of grid fields.
double max_positive_curvature(const GridSpec& g, const std::vector<double>& u, double sigma) {
  double worst = 0.0;
  int n = g.dim();
  for (std::size_t flat = 0; flat < g.total; ++flat) {
    double acc = 0.0;
    bool interior = true;
    for (int d = 0; d < n; ++d) {
      std::size_t i = (flat / g.stride[d]) % g.counts[d];
      if (i == 0 || i + 1 == g.counts[d]) {
        interior = false;
        break;
      }
      double curv = (u[flat + g.stride[d]] - 2.0 * u[flat] + u[flat - g.stride[d]]) / g.h[d];
      if (curv > 0.0) acc += curv;
    }
    if (interior) worst = std::max(worst, acc);
  }
  return 0.5 * sigma * worst;
}

}  // namespace

ValueField solve_evolutive(const Objective& obj, double lambda, const GridSpec& grid,
                           double horizon, double dt, const SolveOptions& opts) {
  if (lambda < 0.0) throw std::invalid_argument("solve_evolutive: lambda must be >= 0");
  if (horizon <= 0.0) throw std::invalid_argument("solve_evolutive: horizon must be positive");
  if (dt <= 0.0) throw std::invalid_argument("solve_evolutive: dt must be positive");
  double sigma = scheme_sigma(obj);
  check_cfl(grid, sigma, lambda, dt);
  double steps_exact = horizon / dt;
  std::size_t steps = static_cast<std::size_t>(std::llround(steps_exact));
  if (steps == 0 || std::abs(steps_exact - static_cast<double>(steps)) > 1e-9 * steps_exact)
    throw std::invalid_argument("solve_evolutive: dt must divide the horizon");
  if (steps > opts.max_steps) throw std::invalid_argument("solve_evolutive: step budget exceeded");

  std::size_t keep = opts.keep_every;
  if (keep == 0) keep = std::max<std::size_t>(1, steps / 256);

  std::vector<double> f = sample_objective(obj, grid);
  Stepper st{grid, f, lambda, dt, sigma};

  ValueField field;
  field.grid = grid;
  field.tag = lambda > 0.0 ? CaseTag::EvolutiveDiscounted : CaseTag::EvolutiveUndiscounted;
  field.lambda = lambda;
  field.sigma = sigma;
  field.dt = dt;
  field.steps = steps;

  std::vector<double> u(grid.total, 0.0), next(grid.total);
  field.times.push_back(0.0);
  field.values.push_back(u);
  for (std::size_t k = 1; k <= steps; ++k) {
    auto [diff, mag] = st.advance(u, next);
    u.swap(next);
    if (!std::isfinite(mag) || mag > 1e12)
      throw std::runtime_error("solve_evolutive: solver diverged at step " + std::to_string(k));
    if (k % keep == 0 || k == steps) {
      field.times.push_back(static_cast<double>(k) * dt);
      field.values.push_back(u);
    }
  }

  double rate = max_positive_curvature(grid, field.values.back(), sigma);
  double weight = lambda > 0.0 ? (1.0 - std::exp(-lambda * horizon)) / lambda : horizon;
  field.soundness_tol = std::max(1e-3, rate * weight);
  return field;
}

ValueField solve_stationary(const Objective& obj, double lambda, const GridSpec& grid,
                            double dt, double tol, const SolveOptions& opts) {
  if (lambda <= 0.0) throw std::invalid_argument("solve_stationary: lambda must be positive");
  if (dt <= 0.0 || tol <= 0.0) throw std::invalid_argument("solve_stationary: dt and tol must be positive");
  double sigma = scheme_sigma(obj);
  check_cfl(grid, sigma, lambda, dt);

  std::vector<double> f = sample_objective(obj, grid);
  Stepper st{grid, f, lambda, dt, sigma};

  std::vector<double> u(grid.total, 0.0), next(grid.total);
  std::deque<double> recent;
  std::size_t k = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (k < opts.max_steps) {
    auto [diff, mag] = st.advance(u, next);
    u.swap(next);
    ++k;
    residual = diff / dt;
    if (!std::isfinite(mag) || mag > 1e12)
      throw std::runtime_error("solve_stationary: solver diverged at step " + std::to_string(k));
    recent.push_back(residual);
    if (recent.size() > 5) recent.pop_front();
    if (residual < tol) break;
  }
  if (residual >= tol) {
    std::ostringstream msg;
    msg << "solve_stationary: no convergence within " << opts.max_steps << " steps; recent residuals:";
    for (double r : recent) msg << " " << fmt(r);
    throw std::runtime_error(msg.str());
  }

  ValueField field;
  field.grid = grid;
  field.tag = CaseTag::StationaryDiscounted;
  field.lambda = lambda;
  field.sigma = sigma;
  field.dt = dt;
  field.residual = residual;
  field.steps = k;
  field.times = {0.0};
  field.values.push_back(std::move(u));
  double rate = max_positive_curvature(grid, field.values.back(), sigma);
  field.soundness_tol = std::max(1e-3, rate / lambda + tol / lambda);
  return field;
}

std::vector<CheckReport> verify_bounds(const ValueField& field, const Objective& obj,
                                       double slack) {
  const GridSpec& g = field.grid;
  double sup = obj.sup_norm;
  double lambda = field.lambda;
  std::vector<CheckReport> out;

  auto loc = [&](std::size_t node, double t) {
    std::ostringstream ss;
    ss << "t=" << fmt(t) << " x=(";
    Vec x = g.node(node);
    for (std::size_t d = 0; d < x.size(); ++d) ss << (d ? "," : "") << fmt(x[d]);
    ss << ")";
    return ss.str();
  };

  // Clause: lambda * |u| <= sup |f|.
  if (lambda > 0.0) {
    double worst = 0.0;
    std::size_t wn = 0, ws = 0;
    for (std::size_t s = 0; s < field.values.size(); ++s)
      for (std::size_t i = 0; i < g.total; ++i) {
        double v = lambda * std::abs(field.values[s][i]);
        if (v > worst) { worst = v; wn = i; ws = s; }
      }
    CheckReport r = CheckReport::upper("sup_bound", worst, sup, slack);
    r.location = loc(wn, field.times[ws]);
    out.push_back(r);
  }

  // Clause: |du/dt| <= sup |f| across stored slices.
  if (!field.stationary() && field.values.size() > 1) {
    double worst = 0.0;
    std::size_t wn = 0, ws = 0;
    for (std::size_t s = 0; s + 1 < field.values.size(); ++s) {
      double span = field.times[s + 1] - field.times[s];
      for (std::size_t i = 0; i < g.total; ++i) {
        double v = std::abs(field.values[s + 1][i] - field.values[s][i]) / span;
        if (v > worst) { worst = v; wn = i; ws = s; }
      }
    }
    CheckReport r = CheckReport::upper("rate_bound", worst, sup, slack);
    r.location = loc(wn, field.times[ws]);
    out.push_back(r);
  }

  // Clause: |Du| <= sqrt(6 sup |f|) at interior nodes (central differences).
  {
    double bound = std::sqrt(6.0 * sup);
    double worst = 0.0;
    std::size_t wn = 0, ws = 0;
    int n = g.dim();
    for (std::size_t s = 0; s < field.values.size(); ++s) {
      const auto& u = field.values[s];
      for (std::size_t flat = 0; flat < g.total; ++flat) {
        double sq = 0.0;
        bool interior = true;
        for (int d = 0; d < n; ++d) {
          std::size_t i = (flat / g.stride[d]) % g.counts[d];
          if (i == 0 || i + 1 == g.counts[d]) { interior = false; break; }
          double p = (u[flat + g.stride[d]] - u[flat - g.stride[d]]) / (2.0 * g.h[d]);
          sq += p * p;
        }
        if (!interior) continue;
        double v = std::sqrt(sq);
        if (v > worst) { worst = v; wn = flat; ws = s; }
      }
    }
    CheckReport r = CheckReport::upper("grad_bound", worst, bound, slack);
    r.location = loc(wn, field.times[ws]);
    out.push_back(r);
  }

  // Clause: fmin * w(t) <= u(x,t) <= f(x) * w(t), w(t) = (1-e^{-lambda t})/lambda
  // (t for undiscounted, 1/lambda for stationary).
  {
    double worst_excess = -std::numeric_limits<double>::infinity();
    std::size_t wn = 0, ws = 0;
    bool upper_side = true;
    for (std::size_t s = 0; s < field.values.size(); ++s) {
      double w;
      if (field.stationary()) w = 1.0 / lambda;
      else if (lambda > 0.0) w = (1.0 - std::exp(-lambda * field.times[s])) / lambda;
      else w = field.times[s];
      const auto& u = field.values[s];
      for (std::size_t i = 0; i < g.total; ++i) {
        double fx = obj.eval(g.node(i));
        double over = u[i] - fx * w;
        double under = obj.lower_bound * w - u[i];
        double v = std::max(over, under);
        if (v > worst_excess) { worst_excess = v; wn = i; ws = s; upper_side = over >= under; }
      }
    }
    CheckReport r = CheckReport::upper("sandwich", worst_excess, 0.0, slack);
    r.context["side"] = upper_side ? 1.0 : -1.0;
    r.location = loc(wn, field.times[ws]);
    out.push_back(r);
  }

  return out;
}

}  // namespace stabopt
