#ifndef STABOPT_BOX_HPP
#define STABOPT_BOX_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stabopt {

using Vec = std::vector<double>;

inline double norm2_sq(const Vec& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return s;
}

inline double norm2(const Vec& v) { return std::sqrt(norm2_sq(v)); }

inline double dist2(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Axis-aligned box, the state domain for grids and trajectories.
struct Box {
  Vec lo, hi;

  Box() = default;
  Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size() || lo.empty())
      throw std::invalid_argument("Box: lo/hi dimension mismatch");
    for (std::size_t d = 0; d < lo.size(); ++d)
      if (!(lo[d] < hi[d])) throw std::invalid_argument("Box: lo must be < hi per axis");
  }

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vec& x, double tol = 0.0) const {
    for (std::size_t d = 0; d < lo.size(); ++d)
      if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
    return true;
  }

  Vec clamp(Vec x) const {
    for (std::size_t d = 0; d < lo.size(); ++d) {
      if (x[d] < lo[d]) x[d] = lo[d];
      if (x[d] > hi[d]) x[d] = hi[d];
    }
    return x;
  }

  double width(int d) const { return hi[d] - lo[d]; }

  double diameter() const {
    double s = 0.0;
    for (std::size_t d = 0; d < lo.size(); ++d) s += width(static_cast<int>(d)) * width(static_cast<int>(d));
    return std::sqrt(s);
  }
};

}  // namespace stabopt

#endif
