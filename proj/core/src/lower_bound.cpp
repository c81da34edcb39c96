#include "stabopt/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stabopt {

namespace {

// Integrates  w' = sqrt(2 * max(0, f0(x) - lambda * w))  from w(0) = seed,
// sampling every sample_h. f0 is evaluated along the ray via eval(offset).
// When f0 - lambda*w hits zero the branch freezes: the slope reaches zero
// continuously there, so the joined profile stays C1.
template <class F>
std::vector<double> integrate_branch(F&& f0, double length, double lambda, double seed,
                                     double sample_h, double ode_h) {
  std::size_t nodes = static_cast<std::size_t>(std::round(length / sample_h)) + 1;
  std::vector<double> out(nodes);
  double w = seed;
  out[0] = w;
  bool frozen = false;
  auto slope = [&](double x, double val) {
    double gap = f0(x) - lambda * val;
    return gap <= 0.0 ? 0.0 : std::sqrt(2.0 * gap);
  };
  for (std::size_t i = 1; i < nodes; ++i) {
    double x0 = static_cast<double>(i - 1) * sample_h;
    double x1 = static_cast<double>(i) * sample_h;
    if (!frozen) {
      std::size_t sub =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((x1 - x0) / ode_h)));
      double hh = (x1 - x0) / static_cast<double>(sub);
      for (std::size_t k = 0; k < sub; ++k) {
        double x = x0 + static_cast<double>(k) * hh;
        double k1 = slope(x, w);
        double k2 = slope(x + 0.5 * hh, w + 0.5 * hh * k1);
        double k3 = slope(x + 0.5 * hh, w + 0.5 * hh * k2);
        double k4 = slope(x + hh, w + hh * k3);
        w += hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (f0(x + hh) - lambda * w <= 0.0) frozen = true;
      }
    }
    out[i] = w;
  }
  return out;
}

// Curvature of f0 at a quadratic minimum: f0(m + s) ~ q s^2.
template <class F>
double quad_coefficient(F&& f0_at_offset) {
  double e = 1e-4;
  return (f0_at_offset(e) + f0_at_offset(-e)) / (2.0 * e * e);
}

double seed_value(double q, double lambda, double s0) {
  if (q <= 0.0) return 0.0;
  double p = (-lambda + std::sqrt(lambda * lambda + 8.0 * q)) / 4.0;
  // Slight shrink keeps the seed below the exact branch despite the cubic
  // term of f0 near the minimum.
  return 0.999 * p * s0 * s0;
}

// Validates the piecewise-linear interpolant of the node values against
// lambda*w + |w'|^2/2 <= f0. The interpolant has constant slope per interval,
// so the check is per interval: slope from the node values, w bounded by the
// larger endpoint, f0 bounded below by 5 samples minus the largest adjacent
// sample gap (a smoothness allowance for the unsampled points). Returns the
// worst residual. ratio_min collects min (f0 lower bound)/w for the
// finite-horizon growth rate; intervals where skip(x) holds stay out of the
// ratio because the sampled f0 floor degenerates right at a minimizer, where
// the seed parabola bounds the ratio analytically instead.
template <class F, class S>
double validate_interpolant(F&& f0, const std::vector<double>& v, double h, double lambda,
                            S&& skip, double* ratio_min) {
  double worst = 0.0;
  double rmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    double x0 = static_cast<double>(i) * h;
    double p = (v[i + 1] - v[i]) / h;
    double wmax = std::max(v[i], v[i + 1]);
    double fmin = std::numeric_limits<double>::infinity();
    double gap = 0.0;
    double prev = 0.0;
    for (int j = 0; j < 5; ++j) {
      double fj = f0(x0 + h * static_cast<double>(j) / 4.0);
      fmin = std::min(fmin, fj);
      if (j > 0) gap = std::max(gap, std::abs(fj - prev));
      prev = fj;
    }
    double floor = fmin - gap;
    double res = lambda * wmax + 0.5 * p * p - floor;
    worst = std::max(worst, res);
    if (wmax > 0.0 && !skip(x0 + 0.5 * h))
      rmin = std::min(rmin, std::max(0.0, floor) / wmax);
  }
  if (ratio_min) *ratio_min = rmin;
  return worst;
}

// Growth-rate contribution of the seed region: w = 0.999 p s^2 under
// f0 ~ q s^2 gives f0/w ~ q/p there; 0.9 absorbs the cubic term of f0 over
// the (tiny) covered radius.
double seed_ratio(double q, double lambda) {
  if (q <= 0.0) return 0.0;
  double p = (-lambda + std::sqrt(lambda * lambda + 8.0 * q)) / 4.0;
  return 0.9 * q / p;
}

constexpr double kDead = std::numeric_limits<double>::infinity();

}  // namespace

LowerBoundField LowerBoundField::build(const Objective& obj, double lambda,
                                       const LowerBoundOptions& opts) {
  if (lambda < 0.0) throw std::invalid_argument("LowerBoundField: lambda must be >= 0");
  LowerBoundField lb;
  lb.dim_ = obj.dim;
  lb.lambda_ = lambda;
  lb.f_min_ = obj.lower_bound;
  lb.opts_ = opts;

  if (!obj.minimizers)
    throw std::invalid_argument("LowerBoundField: objective has no minimizer set");

  if (obj.minimizers->kind == MinimizerSet::Kind::WholeDomain) {
    lb.constant_ = true;
    lb.growth_rate_ = std::numeric_limits<double>::infinity();
    return lb;
  }

  auto f0 = [&](const Vec& x) { return obj.eval(x) - obj.lower_bound; };

  if (obj.dim == 1) {
    double lo = obj.domain.lo[0], hi = obj.domain.hi[0];
    std::size_t nodes = static_cast<std::size_t>(std::round((hi - lo) / opts.sample_h)) + 1;
    double h = (hi - lo) / static_cast<double>(nodes - 1);
    lb.axis_lo_ = lo;
    lb.axis_h_ = h;
    lb.axis_values_.assign(nodes, kDead);

    double seed_rate = std::numeric_limits<double>::infinity();
    for (const Vec& m : obj.minimizers->points) {
      double xm = m[0];
      double q = quad_coefficient([&](double s) { return f0(Vec{xm + s}); });
      seed_rate = std::min(seed_rate, seed_ratio(q, lambda));
      auto blend_branch = [&](bool rightward) {
        double start = rightward ? xm + opts.seed_radius : xm - opts.seed_radius;
        double length = rightward ? hi - start : start - lo;
        if (length <= 0.0) return;
        double seed = seed_value(q, lambda, opts.seed_radius);
        auto vals = integrate_branch(
            [&](double s) { return f0(Vec{rightward ? start + s : start - s}); }, length, lambda,
            seed, h, opts.ode_h);
        for (std::size_t i = 0; i < nodes; ++i) {
          double x = lo + static_cast<double>(i) * h;
          if (rightward ? x < xm : x > xm) continue;
          double off = rightward ? x - start : start - x;
          double v;
          if (off <= 0.0) {
            v = seed_value(q, lambda, std::abs(x - xm));
          } else {
            std::size_t j = std::min(vals.size() - 1, static_cast<std::size_t>(off / h));
            double frac = off / h - static_cast<double>(j);
            v = j + 1 < vals.size() ? (1.0 - frac) * vals[j] + frac * vals[j + 1] : vals[j];
          }
          lb.axis_values_[i] = std::min(lb.axis_values_[i], v);
        }
      };
      blend_branch(true);
      blend_branch(false);
      // Exact zero at the minimizer node when it lands on the lattice.
      double tn = (xm - lo) / h;
      auto nearest = static_cast<std::size_t>(std::llround(tn));
      if (nearest < nodes && std::abs(lo + static_cast<double>(nearest) * h - xm) < 1e-12)
        lb.axis_values_[nearest] = 0.0;
    }

    for (double v : lb.axis_values_)
      if (!std::isfinite(v))
        throw std::runtime_error("LowerBoundField: a node was reached by no branch");

    double cover = opts.seed_radius + 2.0 * h;
    auto near_minimizer = [&](double x) {
      for (const Vec& m : obj.minimizers->points)
        if (std::abs(lo + x - m[0]) <= cover) return true;
      return false;
    };
    double ratio_min = 0.0;
    lb.residual_ = validate_interpolant([&](double x) { return f0(Vec{lo + x}); },
                                        lb.axis_values_, h, lambda, near_minimizer, &ratio_min);
    if (lb.residual_ > 0.02)
      throw std::runtime_error(
          "LowerBoundField: residual too large, the branch surface is not a subsolution");
    double rate = std::min(seed_rate, 0.95 * ratio_min);
    lb.growth_rate_ = std::isfinite(rate) && rate > 0.0 ? rate : 0.0;
    return lb;
  }

  // dim >= 2: one radial profile, minimized over sources. Validity of the
  // minimum needs the profile of f itself to be nondecreasing, so that the
  // nearest source realizes f exactly; checked below alongside the residual.
  if (!obj.radial)
    throw std::invalid_argument("LowerBoundField: objective in dim >= 2 has no radial structure");
  const RadialStructure& rad = *obj.radial;
  double g0 = rad.profile(0.0);
  double rmax = 0.0;
  for (const Vec& s : rad.sources) {
    Vec corner(static_cast<std::size_t>(obj.dim));
    for (int d = 0; d < obj.dim; ++d)
      corner[d] = std::max(std::abs(obj.domain.lo[d] - s[d]), std::abs(obj.domain.hi[d] - s[d]));
    rmax = std::max(rmax, norm2(corner));
  }
  rmax += opts.sample_h;
  std::size_t nodes = static_cast<std::size_t>(std::ceil(rmax / opts.sample_h)) + 1;
  double h = rmax / static_cast<double>(nodes - 1);
  double q = quad_coefficient([&](double s) { return rad.profile(std::abs(s)) - g0; });
  double seed = seed_value(q, lambda, opts.seed_radius);
  auto vals = integrate_branch([&](double s) { return rad.profile(opts.seed_radius + s) - g0; },
                               rmax - opts.seed_radius, lambda, seed, h, opts.ode_h);

  lb.sources_ = rad.sources;
  lb.profile_h_ = h;
  lb.profile_.assign(nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    double r = static_cast<double>(i) * h;
    if (r <= opts.seed_radius) {
      lb.profile_[i] = seed_value(q, lambda, r);
    } else {
      double off = r - opts.seed_radius;
      std::size_t j = std::min(vals.size() - 1, static_cast<std::size_t>(off / h));
      double frac = off / h - static_cast<double>(j);
      lb.profile_[i] = j + 1 < vals.size() ? (1.0 - frac) * vals[j] + frac * vals[j + 1] : vals[j];
    }
  }

  double prev = rad.profile(0.0);
  for (std::size_t i = 1; i < nodes; ++i) {
    double cur = rad.profile(static_cast<double>(i) * h);
    if (cur < prev - 1e-12)
      throw std::invalid_argument("LowerBoundField: radial profile of f must be nondecreasing");
    prev = cur;
  }

  double cover = opts.seed_radius + 2.0 * h;
  double ratio_min = 0.0;
  lb.residual_ = validate_interpolant([&](double r) { return rad.profile(r) - g0; }, lb.profile_,
                                      h, lambda, [&](double r) { return r <= cover; },
                                      &ratio_min);
  if (lb.residual_ > 0.02)
    throw std::runtime_error(
        "LowerBoundField: residual too large, the radial profile is not a subsolution");
  double rate = std::min(seed_ratio(q, lambda), 0.95 * ratio_min);
  lb.growth_rate_ = std::isfinite(rate) && rate > 0.0 ? rate : 0.0;
  return lb;
}

double LowerBoundField::raw_value(const Vec& x) const {
  if (constant_) return 0.0;
  if (dim_ == 1) {
    double t = (x[0] - axis_lo_) / axis_h_;
    if (t < 0.0) t = 0.0;
    double tmax = static_cast<double>(axis_values_.size() - 1);
    if (t > tmax) t = tmax;
    std::size_t i = std::min(axis_values_.size() - 2, static_cast<std::size_t>(t));
    double frac = t - static_cast<double>(i);
    return (1.0 - frac) * axis_values_[i] + frac * axis_values_[i + 1];
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& s : sources_) {
    double r = dist2(x, s);
    double t = r / profile_h_;
    double tmax = static_cast<double>(profile_.size() - 1);
    if (t > tmax) t = tmax;
    std::size_t i = std::min(profile_.size() - 2, static_cast<std::size_t>(t));
    double frac = t - static_cast<double>(i);
    best = std::min(best, (1.0 - frac) * profile_[i] + frac * profile_[i + 1]);
  }
  return best;
}

double LowerBoundField::stationary_value(const Vec& x) const {
  if (lambda_ <= 0.0)
    throw std::logic_error("LowerBoundField: stationary value needs lambda > 0");
  double slack = opts_.safety + std::max(0.0, residual_) / lambda_;
  return raw_value(x) + f_min_ / lambda_ - slack;
}

double LowerBoundField::evolutive_value(const Vec& x, double t) const {
  if (t < 0.0) throw std::invalid_argument("LowerBoundField: negative horizon");
  double weight = lambda_ > 0.0 ? (1.0 - std::exp(-lambda_ * t)) / lambda_ : t;
  double base = f_min_ * weight;
  double slack = opts_.safety + std::max(0.0, residual_) * weight;
  if (constant_) return base - slack;
  if (growth_rate_ <= 0.0)
    throw std::logic_error("LowerBoundField: no finite-horizon bound, growth rate unavailable");
  double damp = 1.0 - std::exp(-growth_rate_ * t);
  return raw_value(x) * damp + base - slack;
}

Vec LowerBoundField::feedback_gradient(const Vec& x) const {
  Vec g(static_cast<std::size_t>(dim_), 0.0);
  if (constant_) return g;
  if (dim_ == 1) {
    double h = axis_h_;
    double lo = axis_lo_;
    double hi = lo + h * static_cast<double>(axis_values_.size() - 1);
    double a = std::max(lo, x[0] - h), b = std::min(hi, x[0] + h);
    g[0] = (raw_value(Vec{b}) - raw_value(Vec{a})) / (b - a);
    return g;
  }
  // The nearest source realizes the minimum; differentiate its profile.
  double bestr = std::numeric_limits<double>::infinity();
  const Vec* bests = nullptr;
  for (const Vec& s : sources_) {
    double r = dist2(x, s);
    if (r < bestr) {
      bestr = r;
      bests = &s;
    }
  }
  double h = profile_h_;
  double a = std::max(0.0, bestr - h);
  double b = bestr + h;
  auto prof = [&](double r) {
    double t = std::min(r / h, static_cast<double>(profile_.size() - 1));
    std::size_t i = std::min(profile_.size() - 2, static_cast<std::size_t>(t));
    double frac = t - static_cast<double>(i);
    return (1.0 - frac) * profile_[i] + frac * profile_[i + 1];
  };
  double slope = (prof(b) - prof(a)) / (b - a);
  if (bestr > 1e-12)
    for (int d = 0; d < dim_; ++d) g[d] = slope * (x[d] - (*bests)[d]) / bestr;
  return g;
}

}  // namespace stabopt
