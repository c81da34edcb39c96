#include "stabopt/control.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stabopt/io.hpp"

namespace stabopt {

namespace {

// 3-point Gauss rule on [0,1].
constexpr double kTheta[3] = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr double kOmega[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double interval_weight(double lambda, double t0, double t1) {
  if (lambda == 0.0) return t1 - t0;
  return (std::exp(-lambda * t0) - std::exp(-lambda * t1)) / lambda;
}

Vec objective_gradient(const Objective& obj, const Vec& x) {
  const double h = 1e-6;
  Vec g(x.size());
  Vec p = x;
  for (std::size_t d = 0; d < x.size(); ++d) {
    double saved = p[d];
    p[d] = saved + h;
    double up = obj.eval(p);
    p[d] = saved - h;
    double dn = obj.eval(p);
    p[d] = saved;
    g[d] = (up - dn) / (2.0 * h);
  }
  return g;
}

void cap_control(Vec& a, double cap) {
  double m = norm2(a);
  if (m > cap)
    for (double& v : a) v *= cap / m;
}

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("control: dt must be positive");
  auto k = static_cast<long long>(std::llround(horizon / dt));
  if (k < 1 || std::abs(horizon - static_cast<double>(k) * dt) > 1e-9 * std::max(1.0, horizon))
    throw std::invalid_argument("control: horizon must be a positive multiple of dt");
  return static_cast<std::size_t>(k);
}

}  // namespace

Vec Trajectory::state_at(double s) const {
  if (states.empty()) throw std::logic_error("Trajectory::state_at on empty trajectory");
  double t = std::clamp(s, 0.0, horizon());
  std::size_t k = controls.empty() ? 0 : std::min(controls.size() - 1, static_cast<std::size_t>(t / dt));
  double frac = controls.empty() ? 0.0 : (t - static_cast<double>(k) * dt) / dt;
  Vec out = states[k];
  for (std::size_t d = 0; d < out.size(); ++d)
    out[d] += frac * (states[k + 1][d] - states[k][d]);
  return out;
}

Trajectory integrate(const Vec& start, const std::vector<Vec>& controls, double dt,
                     const Box& box, double lambda) {
  if (static_cast<int>(start.size()) != box.dim())
    throw std::invalid_argument("integrate: start dimension does not match the box");
  if (!box.contains(start, 1e-9))
    throw std::invalid_argument("integrate: start lies outside the box");
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (lambda < 0.0) throw std::invalid_argument("integrate: lambda must be >= 0");

  Trajectory traj;
  traj.dt = dt;
  traj.lambda = lambda;
  traj.states.reserve(controls.size() + 1);
  traj.controls.reserve(controls.size());
  traj.states.push_back(box.clamp(start));
  for (const Vec& a : controls) {
    if (a.size() != start.size())
      throw std::invalid_argument("integrate: control dimension mismatch");
    const Vec& y = traj.states.back();
    Vec next(y.size());
    for (std::size_t d = 0; d < y.size(); ++d) next[d] = y[d] + dt * a[d];
    next = box.clamp(next);
    // The stored control is the realized velocity, so states and controls
    // stay consistent even when the box clamp binds.
    Vec realized(y.size());
    for (std::size_t d = 0; d < y.size(); ++d) realized[d] = (next[d] - y[d]) / dt;
    traj.controls.push_back(std::move(realized));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double trajectory_cost(const Objective& obj, const Trajectory& traj) {
  double lambda = traj.lambda;
  double dt = traj.dt;
  double J = 0.0;
  Vec p(obj.dim);
  for (std::size_t k = 0; k < traj.controls.size(); ++k) {
    double t0 = static_cast<double>(k) * dt;
    const Vec& y = traj.states[k];
    const Vec& a = traj.controls[k];
    J += 0.5 * norm2_sq(a) * interval_weight(lambda, t0, t0 + dt);
    for (int q = 0; q < 3; ++q) {
      double s = t0 + kTheta[q] * dt;
      for (int d = 0; d < obj.dim; ++d) p[d] = y[d] + kTheta[q] * dt * a[d];
      J += dt * kOmega[q] * obj.eval(p) * std::exp(-lambda * s);
    }
  }
  return J;
}

void fill_cost(const Objective& obj, Trajectory& traj) { traj.cost = trajectory_cost(obj, traj); }

double control_cap(const Objective& obj) { return 1.0 + std::sqrt(6.0 * obj.sup_norm); }

std::vector<Vec> cost_gradient(const Objective& obj, const Trajectory& traj) {
  double lambda = traj.lambda;
  double dt = traj.dt;
  std::size_t K = traj.controls.size();
  int n = obj.dim;
  std::vector<Vec> grad(K, Vec(n, 0.0));
  std::vector<Vec> state_grad(K, Vec(n, 0.0));  // d(step k cost)/d(state k)
  Vec p(n);
  for (std::size_t k = 0; k < K; ++k) {
    double t0 = static_cast<double>(k) * dt;
    double w = interval_weight(lambda, t0, t0 + dt);
    const Vec& y = traj.states[k];
    const Vec& a = traj.controls[k];
    for (int d = 0; d < n; ++d) grad[k][d] = a[d] * w;
    for (int q = 0; q < 3; ++q) {
      double s = t0 + kTheta[q] * dt;
      double c = dt * kOmega[q] * std::exp(-lambda * s);
      for (int d = 0; d < n; ++d) p[d] = y[d] + kTheta[q] * dt * a[d];
      Vec df = objective_gradient(obj, p);
      for (int d = 0; d < n; ++d) {
        grad[k][d] += c * kTheta[q] * dt * df[d];
        state_grad[k][d] += c * df[d];
      }
    }
  }
  // Backward sweep: accumulated sensitivity of the future cost to each state.
  Vec P(n, 0.0);
  for (std::size_t k = K; k-- > 0;) {
    for (int d = 0; d < n; ++d) grad[k][d] += dt * P[d];
    for (int d = 0; d < n; ++d) P[d] += state_grad[k][d];
  }
  return grad;
}

Trajectory rollout_feedback(const ValueField& field, const Objective& obj, const Vec& start,
                            double dt, double horizon) {
  std::size_t K = step_count(horizon, dt);
  if (!field.stationary() && horizon > field.final_time() + 1e-9)
    throw std::invalid_argument("rollout_feedback: horizon exceeds the field's time range");
  double cap = control_cap(obj);
  std::vector<Vec> controls;
  controls.reserve(K);
  Vec y = obj.domain.clamp(start);
  if (!obj.domain.contains(start, 1e-9))
    throw std::invalid_argument("rollout_feedback: start lies outside the domain");
  for (std::size_t k = 0; k < K; ++k) {
    double remaining = horizon - static_cast<double>(k) * dt;
    Vec g = field.stationary() ? field.gradient_at(y, 0.0) : field.gradient_at(y, remaining);
    Vec a(g.size());
    for (std::size_t d = 0; d < g.size(); ++d) a[d] = -g[d];
    cap_control(a, cap);
    controls.push_back(a);
    for (std::size_t d = 0; d < y.size(); ++d) y[d] += dt * a[d];
    y = obj.domain.clamp(y);
  }
  Trajectory traj = integrate(start, controls, dt, obj.domain, field.lambda);
  fill_cost(obj, traj);
  return traj;
}

Trajectory rollout_feedback(const LowerBoundField& lb, const Objective& obj, const Vec& start,
                            double dt, double horizon) {
  std::size_t K = step_count(horizon, dt);
  double cap = control_cap(obj);
  std::vector<Vec> controls;
  controls.reserve(K);
  if (!obj.domain.contains(start, 1e-9))
    throw std::invalid_argument("rollout_feedback: start lies outside the domain");
  Vec y = obj.domain.clamp(start);
  for (std::size_t k = 0; k < K; ++k) {
    Vec g = lb.feedback_gradient(y);
    Vec a(g.size());
    for (std::size_t d = 0; d < g.size(); ++d) a[d] = -g[d];
    cap_control(a, cap);
    controls.push_back(a);
    for (std::size_t d = 0; d < y.size(); ++d) y[d] += dt * a[d];
    y = obj.domain.clamp(y);
  }
  Trajectory traj = integrate(start, controls, dt, obj.domain, lb.lambda());
  fill_cost(obj, traj);
  return traj;
}

OptimizeResult optimize_direct(const Objective& obj, const Vec& start, double lambda,
                               double horizon, double dt,
                               const std::vector<Vec>* init_controls,
                               const OptimizeOptions& opts) {
  std::size_t K = step_count(horizon, dt);
  int n = obj.dim;
  double cap = opts.control_bound > 0.0 ? opts.control_bound : control_cap(obj);

  std::vector<Vec> alpha(K, Vec(n, 0.0));
  if (init_controls) {
    if (init_controls->size() != K)
      throw std::invalid_argument("optimize_direct: initial control has the wrong step count");
    alpha = *init_controls;
    for (Vec& a : alpha) cap_control(a, cap);
  }

  auto sup_norm_of = [&](const std::vector<Vec>& g) {
    double m = 0.0;
    for (const Vec& v : g)
      for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  // The iterate always holds realized controls (integrate clamps states to
  // the box and stores the resulting velocities), so the cost gradient at the
  // iterate is exact and the feasible set needs no extra bookkeeping.
  Trajectory traj = integrate(start, alpha, dt, obj.domain, lambda);
  alpha = traj.controls;
  double J = trajectory_cost(obj, traj);
  std::vector<Vec> g = cost_gradient(obj, traj);

  // Unstable equilibria leave the zero signal with a vanishing gradient.
  if (sup_norm_of(g) < 1e-12 && K > 0) {
    alpha[0][0] += 1e-6;
    traj = integrate(start, alpha, dt, obj.domain, lambda);
    alpha = traj.controls;
    J = trajectory_cost(obj, traj);
    g = cost_gradient(obj, traj);
  }

  OptimizeResult result;
  double step = opts.initial_step;
  std::vector<Vec> prev_alpha, prev_g;
  int small_moves = 0;
  int it = 0;
  bool converged = false;
  for (it = 0; it < opts.max_iterations; ++it) {
    // Spectral trial step from the previous accepted move; backtracking below
    // still enforces the Armijo decrease.
    if (!prev_alpha.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        for (int d = 0; d < n; ++d) {
          double s = alpha[k][d] - prev_alpha[k][d];
          double y = g[k][d] - prev_g[k][d];
          ss += s * s;
          sy += s * y;
        }
      step = sy > 1e-300 ? std::min(std::max(ss / sy, 1e-6), 1e6)
                         : std::min(step * 2.0, 1e6);
    }

    bool accepted = false;
    std::vector<Vec> cand(K, Vec(n));
    Trajectory ctraj;
    double cJ = 0.0;
    double move = 0.0;
    for (int b = 0; b <= opts.max_backtracks; ++b) {
      double req2 = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        for (int d = 0; d < n; ++d) cand[k][d] = alpha[k][d] - step * g[k][d];
        cap_control(cand[k], cap);
        for (int d = 0; d < n; ++d) {
          double dd = cand[k][d] - alpha[k][d];
          req2 += dd * dd;
        }
      }
      if (req2 == 0.0) break;
      ctraj = integrate(start, cand, dt, obj.domain, lambda);
      cand = ctraj.controls;  // box projection along the path
      double diff2 = 0.0;
      move = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        for (int d = 0; d < n; ++d) {
          double dd = cand[k][d] - alpha[k][d];
          diff2 += dd * dd;
          move = std::max(move, std::abs(dd));
        }
      cJ = trajectory_cost(obj, ctraj);
      if (cJ <= J - (opts.armijo_c / step) * diff2) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      // Line search bottomed out: stationary to working precision.
      converged = true;
      break;
    }
    prev_alpha = std::move(alpha);
    prev_g = std::move(g);
    alpha = std::move(cand);
    traj = std::move(ctraj);
    J = cJ;
    g = cost_gradient(obj, traj);
    // Saddle escapes pass through tiny moves that then grow again, so one
    // quiet iteration is not enough to stop.
    small_moves = move < opts.tolerance ? small_moves + 1 : 0;
    if (small_moves >= 3) {
      converged = true;
      ++it;
      break;
    }
  }

  fill_cost(obj, traj);
  result.trajectory = std::move(traj);
  result.cost = J;
  result.iterations = it;
  result.gradient_norm = sup_norm_of(g);
  result.converged = converged;
  result.budget_exhausted = !converged;
  return result;
}

namespace {

Certificate make_certificate(double J, double tail, double ref, double soundness_tol) {
  Certificate c;
  c.trajectory_cost = J;
  c.tail = tail;
  c.reference_value = ref;
  c.raw_gap = J + tail - ref;
  c.sound = c.raw_gap >= -soundness_tol;
  c.epsilon = std::max(c.raw_gap, 0.0);
  return c;
}

}  // namespace

Certificate certify_epsilon(const Objective& obj, const Trajectory& traj,
                            const ValueField& field) {
  if (std::abs(traj.lambda - field.lambda) > 1e-12)
    throw std::invalid_argument("certify_epsilon: trajectory and field disagree on lambda");
  double J = std::isnan(traj.cost) ? trajectory_cost(obj, traj) : traj.cost;
  const Vec& y0 = traj.states.front();
  if (field.stationary()) {
    double tail = obj.sup_norm / field.lambda * std::exp(-field.lambda * traj.horizon());
    return make_certificate(J, tail, field.value_at(y0, 0.0), field.soundness_tol);
  }
  if (traj.horizon() > field.final_time() + 1e-9)
    throw std::invalid_argument("certify_epsilon: horizon exceeds the field's time range");
  return make_certificate(J, 0.0, field.value_at(y0, traj.horizon()), field.soundness_tol);
}

Certificate certify_epsilon(const Objective& obj, const Trajectory& traj,
                            const LowerBoundField& lb, CaseTag tag) {
  if (std::abs(traj.lambda - lb.lambda()) > 1e-12)
    throw std::invalid_argument("certify_epsilon: trajectory and bound disagree on lambda");
  double J = std::isnan(traj.cost) ? trajectory_cost(obj, traj) : traj.cost;
  const Vec& y0 = traj.states.front();
  if (tag == CaseTag::StationaryDiscounted) {
    double tail = obj.sup_norm / lb.lambda() * std::exp(-lb.lambda() * traj.horizon());
    return make_certificate(J, tail, lb.stationary_value(y0), 1e-9);
  }
  if (tag == CaseTag::EvolutiveUndiscounted && lb.lambda() != 0.0)
    throw std::invalid_argument("certify_epsilon: undiscounted case needs a lambda = 0 bound");
  return make_certificate(J, 0.0, lb.evolutive_value(y0, traj.horizon()), 1e-9);
}

void save_trajectory_csv(const std::string& path, const Trajectory& traj, const Objective& obj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trajectory_csv: cannot open " + path);
  int n = traj.dim();
  double cost = std::isnan(traj.cost) ? trajectory_cost(obj, traj) : traj.cost;
  out << "# lambda=" << fmt(traj.lambda) << " dt=" << fmt(traj.dt) << " dim=" << n
      << " steps=" << traj.steps() << " cost=" << fmt(cost) << "\n";
  out << "s";
  for (int d = 0; d < n; ++d) out << ",y" << d + 1;
  for (int d = 0; d < n; ++d) out << ",alpha" << d + 1;
  out << ",objective,dist_to_min,weight\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    double s = static_cast<double>(k) * traj.dt;
    const Vec& y = traj.states[k];
    const Vec& a = traj.controls.empty()
                       ? y
                       : traj.controls[std::min(k, traj.controls.size() - 1)];
    out << fmt(s);
    for (int d = 0; d < n; ++d) out << "," << fmt(y[d]);
    for (int d = 0; d < n; ++d) out << "," << fmt(traj.controls.empty() ? 0.0 : a[d]);
    double dist = obj.minimizers ? distance_to_minimizers(obj, y)
                                 : std::numeric_limits<double>::quiet_NaN();
    out << "," << fmt(obj.eval(y)) << "," << fmt(dist) << ","
        << fmt(std::exp(-traj.lambda * s)) << "\n";
  }
}

Trajectory load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_trajectory_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw std::runtime_error("load_trajectory_csv: missing metadata line in " + path);
  Trajectory traj;
  int n = 0;
  std::size_t steps = 0;
  {
    std::istringstream meta(line.substr(1));
    std::string tok;
    while (meta >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      std::string key = tok.substr(0, eq);
      double val = std::stod(tok.substr(eq + 1));
      if (key == "lambda") traj.lambda = val;
      else if (key == "dt") traj.dt = val;
      else if (key == "dim") n = static_cast<int>(val);
      else if (key == "steps") steps = static_cast<std::size_t>(val);
      else if (key == "cost") traj.cost = val;
    }
  }
  if (n < 1 || traj.dt <= 0.0)
    throw std::runtime_error("load_trajectory_csv: bad metadata in " + path);
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < static_cast<std::size_t>(1 + 2 * n))
      throw std::runtime_error("load_trajectory_csv: short row in " + path);
    Vec y(vals.begin() + 1, vals.begin() + 1 + n);
    Vec a(vals.begin() + 1 + n, vals.begin() + 1 + 2 * n);
    traj.states.push_back(std::move(y));
    if (traj.states.size() <= steps) traj.controls.push_back(std::move(a));
  }
  if (traj.states.size() != steps + 1)
    throw std::runtime_error("load_trajectory_csv: row count disagrees with metadata in " + path);
  return traj;
}

}  // namespace stabopt
