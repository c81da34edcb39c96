#pragma once

// Coarse backward dynamic program over a state/control lattice. Written
// against plain std::vector only, so it shares no code with the library it
// cross-checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace dporacle {

struct Config {
  double state_lo = -2.0, state_hi = 2.0;
  int n_states = 81;
  double control_lo = -2.0, control_hi = 2.0;
  int n_controls = 9;
  double dt = 0.4;
  int steps = 50;  // horizon = steps * dt
  double lambda = 0.1;
};

// Value of the lattice control problem at x_query: piecewise-constant
// controls from the lattice, clamped dynamics, stage cost by a 3-point Gauss
// rule on each step, linear interpolation between state nodes.
inline double value(const std::function<double(double)>& f, const Config& cfg,
                    double x_query) {
  const double h = (cfg.state_hi - cfg.state_lo) / (cfg.n_states - 1);
  const double th[3] = {0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
  const double om[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  auto clampx = [&](double x) {
    return std::min(cfg.state_hi, std::max(cfg.state_lo, x));
  };
  auto interp = [&](const std::vector<double>& v, double x) {
    const double u = (clampx(x) - cfg.state_lo) / h;
    const int i = std::min(cfg.n_states - 2, std::max(0, static_cast<int>(std::floor(u))));
    const double w = u - i;
    return v[i] * (1.0 - w) + v[i + 1] * w;
  };

  std::vector<double> next(cfg.n_states, 0.0), cur(cfg.n_states, 0.0);
  const double decay = std::exp(-cfg.lambda * cfg.dt);
  for (int step = 0; step < cfg.steps; ++step) {
    for (int i = 0; i < cfg.n_states; ++i) {
      const double x = cfg.state_lo + i * h;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < cfg.n_controls; ++c) {
        const double a = cfg.n_controls == 1
                             ? cfg.control_lo
                             : cfg.control_lo + (cfg.control_hi - cfg.control_lo) * c /
                                                    (cfg.n_controls - 1);
        double stage = 0.0;
        for (int q = 0; q < 3; ++q) {
          const double s = th[q] * cfg.dt;
          stage += cfg.dt * om[q] * (0.5 * a * a + f(clampx(x + a * s))) *
                   std::exp(-cfg.lambda * s);
        }
        best = std::min(best, stage + decay * interp(next, clampx(x + a * cfg.dt)));
      }
      cur[i] = best;
    }
    std::swap(cur, next);
  }
  return interp(next, x_query);
}

}  // namespace dporacle
