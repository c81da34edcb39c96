#ifndef STABOPT_VALUE_FIELD_HPP
#define STABOPT_VALUE_FIELD_HPP

#include <string>
#include <vector>

#include "stabopt/grid.hpp"

namespace stabopt {

// The three cost setups: finite horizon with discount, infinite horizon with
// discount, finite horizon without discount.
enum class CaseTag { EvolutiveDiscounted, StationaryDiscounted, EvolutiveUndiscounted };

std::string case_name(CaseTag tag);
CaseTag case_from_name(const std::string& name);

// Value function samples on a grid. Evolutive fields hold one slice per
// stored time stamp (slice 0 is t=0); stationary fields hold a single slice
// with times = {0}.
struct ValueField {
  GridSpec grid;
  CaseTag tag = CaseTag::EvolutiveDiscounted;
  double lambda = 0.0;
  std::vector<double> times;                // ascending, stored slices only
  std::vector<std::vector<double>> values;  // values[slice][node]

  // Scheme metadata filled by the solvers.
  double sigma = 0.0;      // numerical dissipation coefficient
  double dt = 0.0;         // marching step
  double residual = 0.0;   // final sup |u_new - u| / dt (stationary)
  std::size_t steps = 0;   // marching steps taken

  // Tolerance for the certification soundness check: how far below the field
  // a true cost may fall before the field is declared unsound. Grid solves
  // estimate their dissipation excess; exact lower-bound fields use ~1e-9.
  double soundness_tol = 1e-3;
  bool lower_bound_certified = false;

  bool stationary() const { return tag == CaseTag::StationaryDiscounted; }
  double final_time() const { return times.empty() ? 0.0 : times.back(); }

  // Space: multilinear. Time: linear between the two surrounding stored
  // slices (ignored for stationary fields). Outside box or time range throws.
  double value_at(const Vec& x, double t = 0.0) const;

  // Central differences at the surrounding nodes (one-sided at faces),
  // multilinearly interpolated to x, time handled as in value_at.
  Vec gradient_at(const Vec& x, double t = 0.0) const;

  void save_csv(const std::string& path) const;
  void save_binary(const std::string& path) const;
  static ValueField load_csv(const std::string& path);
  static ValueField load_binary(const std::string& path);
};

}  // namespace stabopt

#endif
