#ifndef STABOPT_GRID_HPP
#define STABOPT_GRID_HPP

#include <cstddef>
#include <vector>

#include "stabopt/box.hpp"

namespace stabopt {

// Uniform tensor grid over a box, 1 to 3 axes, at least 16 nodes per axis.
// Spacing must divide the box width to 1e-9 relative accuracy.
struct GridSpec {
  Box box;
  Vec h;                            // spacing per axis
  std::vector<std::size_t> counts;  // nodes per axis
  std::vector<std::size_t> stride;  // row-major-style flattening, axis 0 fastest
  std::size_t total = 0;

  GridSpec() = default;
  GridSpec(Box b, Vec spacing);

  int dim() const { return box.dim(); }
  Vec node(std::size_t flat) const;
  std::size_t flatten(const std::vector<std::size_t>& idx) const;

  // Cell containing x plus interpolation fractions; x must be inside the box
  // (1e-9 tolerance), else std::domain_error.
  void locate(const Vec& x, std::vector<std::size_t>& base, Vec& frac) const;

  double interpolate(const std::vector<double>& values, const Vec& x) const;
};

// Convenience: same spacing on every axis.
GridSpec make_grid(const Box& box, double h);

}  // namespace stabopt

#endif
