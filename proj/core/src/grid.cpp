#include "stabopt/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stabopt {

GridSpec::GridSpec(Box b, Vec spacing) : box(std::move(b)), h(std::move(spacing)) {
  int n = box.dim();
  if (n < 1 || n > 3) throw std::invalid_argument("GridSpec: dimension must be 1..3");
  if (static_cast<int>(h.size()) != n) throw std::invalid_argument("GridSpec: spacing size mismatch");
  counts.resize(n);
  for (int d = 0; d < n; ++d) {
    if (h[d] <= 0.0) throw std::invalid_argument("GridSpec: spacing must be positive");
    double cells = box.width(d) / h[d];
    double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
      throw std::invalid_argument("GridSpec: spacing does not divide axis " + std::to_string(d));
    counts[d] = static_cast<std::size_t>(rounded) + 1;
    if (counts[d] < 16)
      throw std::invalid_argument("GridSpec: fewer than 16 nodes on axis " + std::to_string(d));
  }
  stride.resize(n);
  stride[0] = 1;
  for (int d = 1; d < n; ++d) stride[d] = stride[d - 1] * counts[d - 1];
  total = stride[n - 1] * counts[n - 1];
}

Vec GridSpec::node(std::size_t flat) const {
  int n = dim();
  Vec x(n);
  for (int d = 0; d < n; ++d) {
    std::size_t i = (flat / stride[d]) % counts[d];
    x[d] = box.lo[d] + static_cast<double>(i) * h[d];
  }
  return x;
}

std::size_t GridSpec::flatten(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim(); ++d) flat += stride[d] * idx[d];
  return flat;
}

void GridSpec::locate(const Vec& x, std::vector<std::size_t>& base, Vec& frac) const {
  int n = dim();
  base.resize(n);
  frac.resize(n);
  for (int d = 0; d < n; ++d) {
    double span = box.width(d);
    if (x[d] < box.lo[d] - 1e-9 * span || x[d] > box.hi[d] + 1e-9 * span)
      throw std::domain_error("GridSpec: point outside grid box, extrapolation refused");
    double t = (x[d] - box.lo[d]) / h[d];
    if (t < 0.0) t = 0.0;
    double tmax = static_cast<double>(counts[d] - 1);
    if (t > tmax) t = tmax;
    std::size_t i = static_cast<std::size_t>(t);
    if (i >= counts[d] - 1) i = counts[d] - 2;
    base[d] = i;
    frac[d] = t - static_cast<double>(i);
  }
}

double GridSpec::interpolate(const std::vector<double>& values, const Vec& x) const {
  std::vector<std::size_t> base;
  Vec frac;
  locate(x, base, frac);
  int n = dim();
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) {
      bool up = (corner >> d) & 1u;
      w *= up ? frac[d] : 1.0 - frac[d];
      flat += stride[d] * (base[d] + (up ? 1 : 0));
    }
    if (w != 0.0) acc += w * values[flat];
  }
  return acc;
}

GridSpec make_grid(const Box& box, double h) {
  return GridSpec(box, Vec(static_cast<std::size_t>(box.dim()), h));
}

}  // namespace stabopt
