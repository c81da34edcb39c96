#ifndef STABOPT_OBJECTIVE_HPP
#define STABOPT_OBJECTIVE_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stabopt/box.hpp"

namespace stabopt {

// Global minimizer set of an objective. Either a finite list of points or
// the whole domain (constant objectives).
struct MinimizerSet {
  enum class Kind { Points, WholeDomain };
  Kind kind = Kind::Points;
  std::vector<Vec> points;
  // True when the points were recovered by a grid search instead of being
  // known exactly.
  bool approximate = false;
};

// Declares f(x) = min_i profile(|x - sources[i]|) with a nondecreasing
// profile. Lets the certified lower-bound construction reduce to a 1d
// profile in any dimension.
struct RadialStructure {
  std::vector<Vec> sources;
  std::function<double(double)> profile;
};

// Bounded continuous cost landscape on a box. eval must be callable anywhere
// (it is clamped or extended by formula outside the box by the factories).
struct Objective {
  std::string name;
  std::map<std::string, double> params;
  int dim = 1;
  std::function<double(const Vec&)> eval;
  double lower_bound = 0.0;   // min over the box
  double upper_bound = 0.0;   // max over the box
  double sup_norm = 0.0;      // max |f| over the box
  Box domain;
  std::optional<MinimizerSet> minimizers;
  std::optional<RadialStructure> radial;

  double operator()(const Vec& x) const { return eval(x); }
};

// Catalog entry: built-in objectives by name. Unknown name or out-of-range
// parameters throw std::invalid_argument.
//   constant        params: c (default 1), n (default 1)
//   double_well_1d  params: none
//   clipped_well_nd params: n (default 2)
//   two_pit_2d      params: none
Objective make_benchmark(const std::string& name,
                         const std::map<std::string, double>& params = {});
std::vector<std::string> benchmark_names();

// Euclidean distance from x to the minimizer set. Whole-domain sets give 0
// inside the box. Objectives without a minimizer set must call
// locate_minimizers first.
double distance_to_minimizers(const Objective& obj, const Vec& x);

// Grid search fallback for objectives with unknown minimizers (tabulated
// data). Fills obj.minimizers with every grid point within value_tol of the
// grid minimum; marks the set approximate.
void locate_minimizers(Objective& obj, double resolution, double value_tol = 1e-9);

// Smallest excess f(x) - lower_bound over box grid points at distance >= delta
// from the minimizer set (membership uses a 1e-9 slack so points exactly on
// the boundary count). Returns +inf when no grid point qualifies.
// resolution must satisfy resolution <= delta/4.
double separation_gap(const Objective& obj, double delta, double resolution);

// Convolution with the bump kernel (1-|z|^2)^3 scaled to radius eps,
// normalized against the same tensor Gauss-Legendre rule used for the
// convolution so constants are reproduced exactly. quad_points is per axis,
// at least 3. The result carries the kernel gradient-norm integral in
// params["kernel_grad_integral"], so |Df_eps| <= that / eps * sup_norm.
Objective mollify(const Objective& obj, double eps, int quad_points = 12);

// Values on a uniform grid read from CSV (columns x_1..x_n,value; header row
// optional), evaluated by multilinear interpolation and clamped outside the
// grid box. Bounds are taken from the data; minimizers stay unset.
Objective load_tabulated_csv(const std::string& path);

}  // namespace stabopt

#endif
