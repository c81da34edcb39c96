#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stabopt/control.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/value_field.hpp"

namespace stabopt {

// The three ways a trajectory's time axis turns into a probability measure
// over states: discount-weighted over [0,t] and normalized, discount-weighted
// over [0,inf) truncated with an explicit tail, or plain time fraction.
enum class MeasureCase { FiniteDiscounted, InfiniteDiscounted, TimeAverage };

const char* measure_case_name(MeasureCase tag);
MeasureCase measure_case_from_name(const std::string& name);

// Natural pairing with the value-function cases.
MeasureCase measure_case_for(CaseTag tag);

struct MeasureSample {
  double t0 = 0.0, t1 = 0.0;
  Vec state;          // segment midpoint
  double weight = 0.0;
};

struct OccupationMeasure {
  MeasureCase tag = MeasureCase::TimeAverage;
  double lambda = 0.0;
  double horizon = 0.0;    // normalization horizon; truncation horizon for the infinite case
  double tail_mass = 0.0;  // e^{-lambda*horizon} for the truncated infinite case
  std::vector<MeasureSample> samples;

  double total_mass() const;
};

// One sample per control interval, midpoint state, closed-form weights:
//   FiniteDiscounted   (e^{-lambda a} - e^{-lambda b}) / (1 - e^{-lambda t})
//   InfiniteDiscounted  e^{-lambda a} - e^{-lambda b},  tail_mass = e^{-lambda T}
//   TimeAverage         (b - a) / t
// horizon 0 means the full trajectory; a positive horizon restricts the
// finite and time-average cases to [0, horizon], which must align with the
// step grid. The infinite case always consumes the whole trajectory as its
// truncation.
OccupationMeasure build_measure(const Trajectory& traj, MeasureCase tag, double lambda,
                                double horizon = 0.0);

// Sum of weights whose state satisfies the predicate.
double measure_set(const OccupationMeasure& meas,
                   const std::function<bool(const Vec&)>& membership);

// Mass of the complement of the delta sub-level set, i.e. of
// { y : f(y) > lower_bound + delta }. Boundary points count as inside the
// sub-level set.
double mass_outside(const OccupationMeasure& meas, const Objective& obj, double delta);

// Closed-form variation bounds between the measure cases:
//   first   long-horizon gap between the normalized and infinite discounted
//           measures: 2 e^{-lambda t}
//   second  small-discount gap between the normalized discounted and plain
//           time-average measures:
//           |lambda t/(1-e^{-lambda t}) - 1| + |1 - (1-e^{-lambda t})/(lambda t)|
std::pair<double, double> tv_bounds(double lambda, double t);

// Masses over a uniform bins_per_axis^n partition of the box, flat row-major
// with axis 0 fastest. A sample outside the box is an error, not a clamp.
std::vector<double> histogram(const OccupationMeasure& meas, const Box& box, int bins_per_axis);

// Half the L1 distance between bin masses: the variation distance restricted
// to the partition's sets, a lower bound on the true variation distance.
double empirical_tv(const OccupationMeasure& a, const OccupationMeasure& b, const Box& box,
                    int bins_per_axis);

// Cross-validates measure_set by random time draws through the inverse CDF
// of each case's time distribution (truncated exponential, exponential,
// uniform). Draws past the trajectory horizon extend the path by freezing
// the final control, clamped to the box. Deterministic per seed; expected
// agreement is the usual 3/sqrt(n) Monte Carlo band.
double monte_carlo_check(const Trajectory& traj, MeasureCase tag, double lambda,
                         int n_draws, std::uint64_t seed,
                         const std::function<bool(const Vec&)>& membership, const Box& box);

// Columns: interval_start, interval_end, state coordinates, weight; metadata
// line carries case, lambda, horizon, tail_mass.
void save_measure_csv(const std::string& path, const OccupationMeasure& meas);

// One row per bin: per-axis bin lo and hi, then the mass.
void save_histogram_csv(const std::string& path, const Box& box, int bins_per_axis,
                        const std::vector<double>& masses);

}  // namespace stabopt
