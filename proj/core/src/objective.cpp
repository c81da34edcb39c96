#include "stabopt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace stabopt {

namespace {

double get_param(const std::map<std::string, double>& p, const std::string& key,
                 double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

Box cube(int n, double lo, double hi) { return Box(Vec(n, lo), Vec(n, hi)); }

Objective make_constant(const std::map<std::string, double>& params) {
  double c = get_param(params, "c", 1.0);
  int n = static_cast<int>(get_param(params, "n", 1.0));
  if (n < 1 || n > 3) throw std::invalid_argument("constant: n must be 1..3");
  Objective obj;
  obj.name = "constant";
  obj.params = {{"c", c}, {"n", static_cast<double>(n)}};
  obj.dim = n;
  obj.eval = [c](const Vec&) { return c; };
  obj.lower_bound = c;
  obj.upper_bound = c;
  obj.sup_norm = std::abs(c);
  obj.domain = cube(n, -1.0, 1.0);
  MinimizerSet m;
  m.kind = MinimizerSet::Kind::WholeDomain;
  obj.minimizers = m;
  return obj;
}

Objective make_double_well() {
  Objective obj;
  obj.name = "double_well_1d";
  obj.dim = 1;
  obj.eval = [](const Vec& x) {
    double q = x[0] * x[0] - 1.0;
    return std::min(q * q, 1.0);
  };
  obj.lower_bound = 0.0;
  obj.upper_bound = 1.0;
  obj.sup_norm = 1.0;
  obj.domain = cube(1, -2.0, 2.0);
  MinimizerSet m;
  m.points = {Vec{-1.0}, Vec{1.0}};
  obj.minimizers = m;
  return obj;
}

Objective make_clipped_well(const std::map<std::string, double>& params) {
  int n = static_cast<int>(get_param(params, "n", 2.0));
  if (n < 1 || n > 3) throw std::invalid_argument("clipped_well_nd: n must be 1..3");
  Objective obj;
  obj.name = "clipped_well_nd";
  obj.params = {{"n", static_cast<double>(n)}};
  obj.dim = n;
  obj.eval = [](const Vec& x) {
    double s = 0.0;
    for (double c : x) s += c * c;
    return std::min(s, 1.0);
  };
  obj.lower_bound = 0.0;
  obj.upper_bound = 1.0;
  obj.sup_norm = 1.0;
  obj.domain = cube(n, -2.0, 2.0);
  MinimizerSet m;
  m.points = {Vec(n, 0.0)};
  obj.minimizers = m;
  RadialStructure r;
  r.sources = {Vec(n, 0.0)};
  r.profile = [](double rad) { return std::min(rad * rad, 1.0); };
  obj.radial = r;
  return obj;
}

Objective make_two_pit() {
  Objective obj;
  obj.name = "two_pit_2d";
  obj.dim = 2;
  const Vec p1{-1.0, 0.0}, p2{1.0, 0.0};
  obj.eval = [p1, p2](const Vec& x) {
    double a = (x[0] - p1[0]) * (x[0] - p1[0]) + (x[1] - p1[1]) * (x[1] - p1[1]);
    double b = (x[0] - p2[0]) * (x[0] - p2[0]) + (x[1] - p2[1]) * (x[1] - p2[1]);
    return std::min(std::min(a, b), 1.0);
  };
  obj.lower_bound = 0.0;
  obj.upper_bound = 1.0;
  obj.sup_norm = 1.0;
  obj.domain = cube(2, -2.0, 2.0);
  MinimizerSet m;
  m.points = {p1, p2};
  obj.minimizers = m;
  RadialStructure r;
  r.sources = {p1, p2};
  r.profile = [](double rad) { return std::min(rad * rad, 1.0); };
  obj.radial = r;
  return obj;
}

// Visits every point of the uniform grid with the given spacing over the box.
template <class Fn>
void for_each_grid_point(const Box& box, double resolution, Fn&& fn) {
  int n = box.dim();
  std::vector<int> counts(n);
  for (int d = 0; d < n; ++d)
    counts[d] = static_cast<int>(std::floor(box.width(d) / resolution + 1e-9)) + 1;
  std::vector<int> idx(n, 0);
  Vec x(n);
  while (true) {
    for (int d = 0; d < n; ++d)
      x[d] = std::min(box.lo[d] + idx[d] * resolution, box.hi[d]);
    fn(x);
    int d = 0;
    while (d < n && ++idx[d] >= counts[d]) idx[d++] = 0;
    if (d == n) break;
  }
}

}  // namespace

Objective make_benchmark(const std::string& name,
                         const std::map<std::string, double>& params) {
  if (name == "constant") return make_constant(params);
  if (name == "double_well_1d") return make_double_well();
  if (name == "clipped_well_nd") return make_clipped_well(params);
  if (name == "two_pit_2d") return make_two_pit();
  throw std::invalid_argument("make_benchmark: unknown objective '" + name + "'");
}

std::vector<std::string> benchmark_names() {
  return {"constant", "double_well_1d", "clipped_well_nd", "two_pit_2d"};
}

double distance_to_minimizers(const Objective& obj, const Vec& x) {
  if (!obj.minimizers)
    throw std::invalid_argument("distance_to_minimizers: objective has no minimizer set; call locate_minimizers first");
  const MinimizerSet& m = *obj.minimizers;
  if (m.kind == MinimizerSet::Kind::WholeDomain)
    return obj.domain.contains(x) ? 0.0 : dist2(x, obj.domain.clamp(x));
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& p : m.points) best = std::min(best, dist2(x, p));
  return best;
}

void locate_minimizers(Objective& obj, double resolution, double value_tol) {
  if (resolution <= 0.0) throw std::invalid_argument("locate_minimizers: resolution must be positive");
  double fmin = std::numeric_limits<double>::infinity();
  for_each_grid_point(obj.domain, resolution,
                      [&](const Vec& x) { fmin = std::min(fmin, obj.eval(x)); });
  MinimizerSet m;
  m.approximate = true;
  for_each_grid_point(obj.domain, resolution, [&](const Vec& x) {
    if (obj.eval(x) <= fmin + value_tol) m.points.push_back(x);
  });
  obj.minimizers = m;
  obj.lower_bound = fmin;
}

double separation_gap(const Objective& obj, double delta, double resolution) {
  if (delta <= 0.0) throw std::invalid_argument("separation_gap: delta must be positive");
  if (resolution > delta / 4.0 + 1e-12)
    throw std::invalid_argument("separation_gap: resolution must be <= delta/4");
  if (!obj.minimizers)
    throw std::invalid_argument("separation_gap: objective has no minimizer set");
  double best = std::numeric_limits<double>::infinity();
  for_each_grid_point(obj.domain, resolution, [&](const Vec& x) {
    if (distance_to_minimizers(obj, x) >= delta - 1e-9)
      best = std::min(best, obj.eval(x) - obj.lower_bound);
  });
  return best;
}

Objective mollify(const Objective& obj, double eps, int quad_points) {
  if (eps <= 0.0) throw std::invalid_argument("mollify: eps must be positive");
  if (quad_points < 3) throw std::invalid_argument("mollify: quadrature needs >= 3 points per axis");
  int n = obj.dim;

  // Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_k.
  std::vector<double> gl_x(quad_points), gl_w(quad_points);
  for (int i = 0; i < quad_points; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (quad_points + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= quad_points; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = quad_points * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= quad_points; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = quad_points * (x * p1 - p0) / (x * x - 1.0);
    gl_x[i] = x;
    gl_w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }

  // Tensor nodes over [-1,1]^n with kernel weights. Normalizing by the
  // quadrature's own kernel mass makes the rule reproduce constants exactly.
  struct Node {
    Vec z;
    double w;      // quadrature weight x kernel value
    double gnorm;  // |grad kernel| at z, for the gradient-bound integral
  };
  std::vector<Node> nodes;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec z(n);
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      z[d] = gl_x[idx[d]];
      w *= gl_w[idx[d]];
    }
    double r2 = 0.0;
    for (double c : z) r2 += c * c;
    if (r2 < 1.0) {
      double b = 1.0 - r2;
      double kernel = b * b * b;
      double gnorm = 6.0 * b * b * std::sqrt(r2);
      nodes.push_back({std::move(z), w * kernel, w * gnorm});
    }
    int d = 0;
    while (d < n && ++idx[d] >= quad_points) idx[d++] = 0;
    if (d == n) break;
  }
  double mass = 0.0, grad_integral = 0.0;
  for (const Node& nd : nodes) {
    mass += nd.w;
    grad_integral += nd.gnorm;
  }
  grad_integral /= mass;

  auto base = obj.eval;
  std::vector<Node> shared = nodes;
  Objective out = obj;
  out.name = obj.name + "_mollified";
  out.params["mollify_eps"] = eps;
  out.params["kernel_grad_integral"] = grad_integral;
  out.minimizers.reset();
  out.radial.reset();
  out.eval = [base, shared, eps, mass, n](const Vec& x) {
    double acc = 0.0;
    Vec y(n);
    for (const Node& nd : shared) {
      for (int d = 0; d < n; ++d) y[d] = x[d] - eps * nd.z[d];
      acc += nd.w * base(y);
    }
    return acc / mass;
  };
  return out;
}

Objective load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tabulated_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        numeric = false;
        break;
      }
    }
    if (!numeric) continue;  // header row
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_tabulated_csv: no data rows in " + path);
  int n = static_cast<int>(rows[0].size()) - 1;
  if (n < 1 || n > 3) throw std::runtime_error("load_tabulated_csv: need 1..3 coordinate columns");

  // Recover per-axis sorted unique coordinates; require a full tensor grid.
  std::vector<std::vector<double>> axes(n);
  for (int d = 0; d < n; ++d) {
    std::vector<double> c;
    for (auto& r : rows) c.push_back(r[d]);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            c.end());
    axes[d] = std::move(c);
  }
  std::size_t expect = 1;
  for (int d = 0; d < n; ++d) expect *= axes[d].size();
  if (expect != rows.size())
    throw std::runtime_error("load_tabulated_csv: rows do not form a tensor grid");
  for (int d = 0; d < n; ++d) {
    if (axes[d].size() < 2) throw std::runtime_error("load_tabulated_csv: axis with < 2 nodes");
    double h0 = axes[d][1] - axes[d][0];
    for (std::size_t i = 1; i + 1 < axes[d].size(); ++i)
      if (std::abs(axes[d][i + 1] - axes[d][i] - h0) > 1e-9 * std::max(1.0, std::abs(h0)))
        throw std::runtime_error("load_tabulated_csv: non-uniform spacing");
  }

  std::vector<std::size_t> stride(n, 1);
  for (int d = 1; d < n; ++d) stride[d] = stride[d - 1] * axes[d - 1].size();
  std::size_t total = expect;
  std::vector<double> values(total, std::numeric_limits<double>::quiet_NaN());
  for (auto& r : rows) {
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) {
      auto& ax = axes[d];
      auto it = std::lower_bound(ax.begin(), ax.end(), r[d] - 1e-12);
      flat += stride[d] * static_cast<std::size_t>(it - ax.begin());
    }
    values[flat] = r[n];
  }
  for (double v : values)
    if (std::isnan(v)) throw std::runtime_error("load_tabulated_csv: missing grid entries");

  Vec lo(n), hi(n), h(n);
  std::vector<std::size_t> counts(n);
  for (int d = 0; d < n; ++d) {
    lo[d] = axes[d].front();
    hi[d] = axes[d].back();
    h[d] = axes[d][1] - axes[d][0];
    counts[d] = axes[d].size();
  }
  double vmin = *std::min_element(values.begin(), values.end());
  double vmax = *std::max_element(values.begin(), values.end());

  Objective obj;
  obj.name = "tabulated:" + path;
  obj.dim = n;
  obj.domain = Box(lo, hi);
  obj.lower_bound = vmin;
  obj.upper_bound = vmax;
  obj.sup_norm = std::max(std::abs(vmin), std::abs(vmax));
  obj.eval = [lo, h, counts, stride, values, n](const Vec& xin) {
    // Multilinear interpolation, clamped to the grid box.
    std::vector<std::size_t> base(n);
    Vec frac(n);
    for (int d = 0; d < n; ++d) {
      double t = (xin[d] - lo[d]) / h[d];
      if (t < 0.0) t = 0.0;
      if (t > static_cast<double>(counts[d] - 1)) t = static_cast<double>(counts[d] - 1);
      std::size_t i = static_cast<std::size_t>(t);
      if (i >= counts[d] - 1) i = counts[d] - 2;
      base[d] = i;
      frac[d] = t - static_cast<double>(i);
    }
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (int d = 0; d < n; ++d) {
        bool up = (corner >> d) & 1u;
        w *= up ? frac[d] : 1.0 - frac[d];
        flat += stride[d] * (base[d] + (up ? 1 : 0));
      }
      acc += w * values[flat];
    }
    return acc;
  };
  return obj;
}

}  // namespace stabopt
