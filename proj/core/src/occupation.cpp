#include "stabopt/occupation.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <random>
#include <stdexcept>

#include "stabopt/io.hpp"

namespace stabopt {

namespace {

// Uniform in [0,1) from the top 53 bits, so draws do not depend on the
// standard library's distribution implementation.
double next_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Number of whole steps covered by the requested horizon. The horizon must
// sit on the step grid; silent rounding would bias the last weight.
std::size_t covered_steps(const Trajectory& traj, double horizon, double* t_out) {
  double t = horizon;
  if (t == 0.0) t = traj.horizon();
  if (!(t > 0.0)) throw std::invalid_argument("measure horizon must be positive");
  if (t > traj.horizon() + 1e-9 * std::max(1.0, traj.horizon()))
    throw std::invalid_argument("measure horizon exceeds the trajectory horizon");
  const double steps = t / traj.dt;
  const auto m = static_cast<std::size_t>(std::llround(steps));
  if (m < 1 || std::abs(steps - static_cast<double>(m)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("measure horizon must be a whole number of control steps");
  *t_out = t;
  return m;
}

Vec midpoint(const Vec& a, const Vec& b) {
  Vec m(a.size());
  for (std::size_t d = 0; d < a.size(); ++d) m[d] = 0.5 * (a[d] + b[d]);
  return m;
}

// State at time tau, extending past the trajectory horizon by freezing the
// final control and clamping to the box.
Vec extended_state(const Trajectory& traj, double tau, const Box& box) {
  const double T = traj.horizon();
  if (tau <= T) return traj.state_at(tau);
  Vec y = traj.states.back();
  const Vec& a = traj.controls.back();
  for (std::size_t d = 0; d < y.size(); ++d) y[d] += (tau - T) * a[d];
  return box.clamp(y);
}

void require_case_lambda(MeasureCase tag, double lambda) {
  if (tag == MeasureCase::TimeAverage) {
    if (lambda != 0.0)
      throw std::invalid_argument("time-average measure takes lambda = 0");
  } else if (!(lambda > 0.0)) {
    throw std::invalid_argument("discounted measure needs lambda > 0");
  }
}

}  // namespace

const char* measure_case_name(MeasureCase tag) {
  switch (tag) {
    case MeasureCase::FiniteDiscounted: return "finite_discounted";
    case MeasureCase::InfiniteDiscounted: return "infinite_discounted";
    case MeasureCase::TimeAverage: return "time_average";
  }
  return "?";
}

MeasureCase measure_case_from_name(const std::string& name) {
  if (name == "finite_discounted") return MeasureCase::FiniteDiscounted;
  if (name == "infinite_discounted") return MeasureCase::InfiniteDiscounted;
  if (name == "time_average") return MeasureCase::TimeAverage;
  throw std::invalid_argument("unknown measure case: " + name);
}

MeasureCase measure_case_for(CaseTag tag) {
  switch (tag) {
    case CaseTag::EvolutiveDiscounted: return MeasureCase::FiniteDiscounted;
    case CaseTag::StationaryDiscounted: return MeasureCase::InfiniteDiscounted;
    case CaseTag::EvolutiveUndiscounted: return MeasureCase::TimeAverage;
  }
  throw std::invalid_argument("unknown case tag");
}

double OccupationMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& smp : samples) s += smp.weight;
  return s;
}

OccupationMeasure build_measure(const Trajectory& traj, MeasureCase tag, double lambda,
                                double horizon) {
  if (traj.steps() == 0) throw std::invalid_argument("empty trajectory");
  require_case_lambda(tag, lambda);

  double t = 0.0;
  const std::size_t m = covered_steps(traj, horizon, &t);

  OccupationMeasure meas;
  meas.tag = tag;
  meas.lambda = lambda;
  meas.horizon = t;
  meas.samples.reserve(m);

  const double norm = -std::expm1(-lambda * t);  // 1 - e^{-lambda t}
  if (tag == MeasureCase::InfiniteDiscounted) meas.tail_mass = std::exp(-lambda * t);

  for (std::size_t k = 0; k < m; ++k) {
    MeasureSample smp;
    smp.t0 = static_cast<double>(k) * traj.dt;
    smp.t1 = (k + 1 == m) ? t : smp.t0 + traj.dt;
    smp.state = midpoint(traj.states[k], traj.states[k + 1]);
    switch (tag) {
      case MeasureCase::FiniteDiscounted:
        smp.weight = (std::exp(-lambda * smp.t0) - std::exp(-lambda * smp.t1)) / norm;
        break;
      case MeasureCase::InfiniteDiscounted:
        smp.weight = std::exp(-lambda * smp.t0) - std::exp(-lambda * smp.t1);
        break;
      case MeasureCase::TimeAverage:
        smp.weight = (smp.t1 - smp.t0) / t;
        break;
    }
    meas.samples.push_back(std::move(smp));
  }
  return meas;
}

double measure_set(const OccupationMeasure& meas,
                   const std::function<bool(const Vec&)>& membership) {
  double mass = 0.0;
  for (const auto& smp : meas.samples)
    if (membership(smp.state)) mass += smp.weight;
  return mass;
}

double mass_outside(const OccupationMeasure& meas, const Objective& obj, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  const double threshold = obj.lower_bound + delta;
  return measure_set(meas, [&](const Vec& y) { return obj(y) > threshold; });
}

std::pair<double, double> tv_bounds(double lambda, double t) {
  if (!(lambda > 0.0) || !(t > 0.0))
    throw std::invalid_argument("tv_bounds needs lambda > 0 and t > 0");
  const double x = lambda * t;
  const double em = -std::expm1(-x);  // 1 - e^{-x}
  const double first = 2.0 * std::exp(-x);
  const double second = std::abs(x / em - 1.0) + std::abs(1.0 - em / x);
  return {first, second};
}

std::vector<double> histogram(const OccupationMeasure& meas, const Box& box,
                              int bins_per_axis) {
  const int n = box.dim();
  if (bins_per_axis < 1) throw std::invalid_argument("need at least one bin per axis");
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) {
    total *= static_cast<std::size_t>(bins_per_axis);
    if (total > (std::size_t{1} << 24)) throw std::invalid_argument("histogram too large");
  }
  std::vector<double> masses(total, 0.0);
  for (const auto& smp : meas.samples) {
    if (static_cast<int>(smp.state.size()) != n)
      throw std::invalid_argument("sample dimension does not match the box");
    std::size_t idx = 0, stride = 1;
    for (int d = 0; d < n; ++d) {
      const double lo = box.lo[d], hi = box.hi[d];
      const double x = smp.state[d];
      if (x < lo - 1e-9 || x > hi + 1e-9)
        throw std::invalid_argument("a sample lies outside the histogram box");
      auto b = static_cast<long long>(std::floor((x - lo) / (hi - lo) *
                                                 static_cast<double>(bins_per_axis)));
      if (b < 0) b = 0;
      if (b >= bins_per_axis) b = bins_per_axis - 1;
      idx += stride * static_cast<std::size_t>(b);
      stride *= static_cast<std::size_t>(bins_per_axis);
    }
    masses[idx] += smp.weight;
  }
  return masses;
}

double empirical_tv(const OccupationMeasure& a, const OccupationMeasure& b, const Box& box,
                    int bins_per_axis) {
  const auto ha = histogram(a, box, bins_per_axis);
  const auto hb = histogram(b, box, bins_per_axis);
  double tv = 0.0;
  for (std::size_t i = 0; i < ha.size(); ++i) tv += std::abs(ha[i] - hb[i]);
  return 0.5 * tv;
}

double monte_carlo_check(const Trajectory& traj, MeasureCase tag, double lambda,
                         int n_draws, std::uint64_t seed,
                         const std::function<bool(const Vec&)>& membership, const Box& box) {
  if (n_draws < 1000)
    throw std::invalid_argument("monte carlo check needs at least 1000 draws");
  if (traj.steps() == 0) throw std::invalid_argument("empty trajectory");
  require_case_lambda(tag, lambda);

  const double t = traj.horizon();
  const double F = -std::expm1(-lambda * t);  // mass of [0,t] under the exponential
  std::mt19937_64 gen(seed);
  long long hits = 0;
  for (int i = 0; i < n_draws; ++i) {
    const double u = next_uniform(gen);
    double tau = 0.0;
    switch (tag) {
      case MeasureCase::FiniteDiscounted: tau = -std::log1p(-u * F) / lambda; break;
      case MeasureCase::InfiniteDiscounted: tau = -std::log1p(-u) / lambda; break;
      case MeasureCase::TimeAverage: tau = u * t; break;
    }
    if (membership(extended_state(traj, tau, box))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_draws);
}

void save_measure_csv(const std::string& path, const OccupationMeasure& meas) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# case=" << measure_case_name(meas.tag) << " lambda=" << fmt(meas.lambda)
      << " horizon=" << fmt(meas.horizon) << " tail_mass=" << fmt(meas.tail_mass) << "\n";
  const int n = meas.samples.empty() ? 0 : static_cast<int>(meas.samples.front().state.size());
  out << "interval_start,interval_end";
  for (int d = 0; d < n; ++d) out << ",x" << d + 1;
  out << ",weight\n";
  for (const auto& smp : meas.samples) {
    out << fmt(smp.t0) << "," << fmt(smp.t1);
    for (double x : smp.state) out << "," << fmt(x);
    out << "," << fmt(smp.weight) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_histogram_csv(const std::string& path, const Box& box, int bins_per_axis,
                        const std::vector<double>& masses) {
  const int n = box.dim();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# bins_per_axis=" << bins_per_axis << " dim=" << n << "\n";
  for (int d = 0; d < n; ++d) out << "lo" << d + 1 << ",hi" << d + 1 << ",";
  out << "mass\n";
  for (std::size_t idx = 0; idx < masses.size(); ++idx) {
    std::size_t rest = idx;
    for (int d = 0; d < n; ++d) {
      const auto b = rest % static_cast<std::size_t>(bins_per_axis);
      rest /= static_cast<std::size_t>(bins_per_axis);
      const double w = (box.hi[d] - box.lo[d]) / bins_per_axis;
      out << fmt(box.lo[d] + w * static_cast<double>(b)) << ","
          << fmt(box.lo[d] + w * static_cast<double>(b + 1)) << ",";
    }
    out << fmt(masses[idx]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace stabopt
