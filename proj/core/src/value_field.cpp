#include "stabopt/value_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stabopt/io.hpp"

namespace stabopt {

std::string case_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::EvolutiveDiscounted: return "evolutive_discounted";
    case CaseTag::StationaryDiscounted: return "stationary_discounted";
    case CaseTag::EvolutiveUndiscounted: return "evolutive_undiscounted";
  }
  return "?";
}

CaseTag case_from_name(const std::string& name) {
  if (name == "evolutive_discounted") return CaseTag::EvolutiveDiscounted;
  if (name == "stationary_discounted") return CaseTag::StationaryDiscounted;
  if (name == "evolutive_undiscounted") return CaseTag::EvolutiveUndiscounted;
  throw std::invalid_argument("unknown case tag '" + name + "'");
}

namespace {

// Slice pair bracketing time t plus the blend weight toward the later slice.
struct TimePos {
  std::size_t a, b;
  double w;
};

TimePos locate_time(const std::vector<double>& times, double t) {
  if (times.empty()) throw std::logic_error("ValueField: no stored slices");
  double span = std::max(1.0, std::abs(times.back()));
  if (t < times.front() - 1e-9 * span || t > times.back() + 1e-9 * span)
    throw std::domain_error("ValueField: time outside stored range");
  if (times.size() == 1) return {0, 0, 0.0};
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return {0, 0, 0.0};
  if (it == times.end()) return {times.size() - 1, times.size() - 1, 0.0};
  std::size_t b = static_cast<std::size_t>(it - times.begin());
  std::size_t a = b - 1;
  double w = (t - times[a]) / (times[b] - times[a]);
  return {a, b, w};
}

// Central-difference gradient at a node, one-sided at faces.
void node_gradient(const GridSpec& g, const std::vector<double>& u,
                   const std::vector<std::size_t>& idx, Vec& out) {
  int n = g.dim();
  std::size_t flat = g.flatten(idx);
  for (int d = 0; d < n; ++d) {
    std::size_t i = idx[d];
    double num, den;
    if (i == 0) {
      num = u[flat + g.stride[d]] - u[flat];
      den = g.h[d];
    } else if (i == g.counts[d] - 1) {
      num = u[flat] - u[flat - g.stride[d]];
      den = g.h[d];
    } else {
      num = u[flat + g.stride[d]] - u[flat - g.stride[d]];
      den = 2.0 * g.h[d];
    }
    out[d] = num / den;
  }
}

}  // namespace

double ValueField::value_at(const Vec& x, double t) const {
  if (stationary()) return grid.interpolate(values[0], x);
  TimePos tp = locate_time(times, t);
  double va = grid.interpolate(values[tp.a], x);
  if (tp.a == tp.b) return va;
  double vb = grid.interpolate(values[tp.b], x);
  return (1.0 - tp.w) * va + tp.w * vb;
}

Vec ValueField::gradient_at(const Vec& x, double t) const {
  TimePos tp = stationary() ? TimePos{0, 0, 0.0} : locate_time(times, t);
  std::vector<std::size_t> base;
  Vec frac;
  grid.locate(x, base, frac);
  int n = grid.dim();
  Vec acc(n, 0.0), g(n);
  std::vector<std::size_t> idx(n);
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      bool up = (corner >> d) & 1u;
      w *= up ? frac[d] : 1.0 - frac[d];
      idx[d] = base[d] + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    node_gradient(grid, values[tp.a], idx, g);
    if (tp.a != tp.b) {
      Vec gb(n);
      node_gradient(grid, values[tp.b], idx, gb);
      for (int d = 0; d < n; ++d) g[d] = (1.0 - tp.w) * g[d] + tp.w * gb[d];
    }
    for (int d = 0; d < n; ++d) acc[d] += w * g[d];
  }
  return acc;
}

void ValueField::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("ValueField: cannot write " + path);
  int n = grid.dim();
  out << "# case=" << case_name(tag) << " lambda=" << fmt(lambda)
      << " sigma=" << fmt(sigma) << " dt=" << fmt(dt)
      << " residual=" << fmt(residual) << " steps=" << steps
      << " soundness_tol=" << fmt(soundness_tol)
      << " certified=" << (lower_bound_certified ? 1 : 0) << "\n";
  out << "# box=";
  for (int d = 0; d < n; ++d)
    out << (d ? ";" : "") << fmt(grid.box.lo[d]) << ":" << fmt(grid.box.hi[d]) << ":" << fmt(grid.h[d]);
  out << "\n";
  out << "t";
  for (int d = 0; d < n; ++d) out << ",x" << (d + 1);
  out << ",value\n";
  for (std::size_t s = 0; s < values.size(); ++s) {
    for (std::size_t i = 0; i < grid.total; ++i) {
      Vec x = grid.node(i);
      out << fmt(times[s]);
      for (int d = 0; d < n; ++d) out << "," << fmt(x[d]);
      out << "," << fmt(values[s][i]) << "\n";
    }
  }
}

ValueField ValueField::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ValueField: cannot open " + path);
  ValueField f;
  std::string line;
  Vec lo, hi, h;
  bool have_meta = false, have_box = false;
  std::vector<std::pair<double, std::vector<double>>> slice_rows;  // (t, values in node order)
  std::vector<double> current;
  double current_t = 0.0;
  bool any = false;

  auto flush = [&]() {
    if (any) slice_rows.emplace_back(current_t, current);
    current.clear();
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "case") { f.tag = case_from_name(val); have_meta = true; }
        else if (key == "lambda") f.lambda = std::stod(val);
        else if (key == "sigma") f.sigma = std::stod(val);
        else if (key == "dt") f.dt = std::stod(val);
        else if (key == "residual") f.residual = std::stod(val);
        else if (key == "steps") f.steps = std::stoul(val);
        else if (key == "soundness_tol") f.soundness_tol = std::stod(val);
        else if (key == "certified") f.lower_bound_certified = val == "1";
        else if (key == "box") {
          std::stringstream bs(val);
          std::string axis;
          while (std::getline(bs, axis, ';')) {
            double a, b, c;
            if (std::sscanf(axis.c_str(), "%lf:%lf:%lf", &a, &b, &c) != 3)
              throw std::runtime_error("ValueField: bad box header in " + path);
            lo.push_back(a);
            hi.push_back(b);
            h.push_back(c);
          }
          have_box = true;
        }
      }
      continue;
    }
    if (line[0] == 't') continue;  // column header
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    double t = row.front();
    double v = row.back();
    if (!any || std::abs(t - current_t) > 1e-12 * std::max(1.0, std::abs(t))) {
      flush();
      current_t = t;
      any = true;
    }
    current.push_back(v);
  }
  flush();
  if (!have_meta || !have_box || slice_rows.empty())
    throw std::runtime_error("ValueField: malformed file " + path);
  f.grid = GridSpec(Box(lo, hi), h);
  for (auto& [t, vals] : slice_rows) {
    if (vals.size() != f.grid.total)
      throw std::runtime_error("ValueField: slice node count mismatch in " + path);
    f.times.push_back(t);
    f.values.push_back(std::move(vals));
  }
  return f;
}

namespace {

// Little-endian scalar write/read; host is assumed little-endian (checked).
template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("ValueField: truncated binary file");
  return v;
}

void require_little_endian() {
  std::uint16_t probe = 1;
  if (*reinterpret_cast<std::uint8_t*>(&probe) != 1)
    throw std::runtime_error("ValueField: binary format requires a little-endian host");
}

constexpr std::uint32_t kMagic = 0x53544f56;  // "VOTS" bytes, field dump marker

}  // namespace

void ValueField::save_binary(const std::string& path) const {
  require_little_endian();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("ValueField: cannot write " + path);
  put<std::uint32_t>(out, kMagic);
  put<std::uint32_t>(out, 1);  // version
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tag));
  put<double>(out, lambda);
  put<double>(out, sigma);
  put<double>(out, dt);
  put<double>(out, residual);
  put<std::uint64_t>(out, steps);
  put<double>(out, soundness_tol);
  put<std::uint32_t>(out, lower_bound_certified ? 1 : 0);
  for (int d = 0; d < grid.dim(); ++d) {
    put<double>(out, grid.box.lo[d]);
    put<double>(out, grid.box.hi[d]);
    put<double>(out, grid.h[d]);
  }
  put<std::uint64_t>(out, times.size());
  for (double t : times) put<double>(out, t);
  for (const auto& slice : values)
    out.write(reinterpret_cast<const char*>(slice.data()),
              static_cast<std::streamsize>(slice.size() * sizeof(double)));
}

ValueField ValueField::load_binary(const std::string& path) {
  require_little_endian();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("ValueField: cannot open " + path);
  if (get<std::uint32_t>(in) != kMagic) throw std::runtime_error("ValueField: bad magic in " + path);
  if (get<std::uint32_t>(in) != 1) throw std::runtime_error("ValueField: unsupported version");
  std::uint32_t n = get<std::uint32_t>(in);
  ValueField f;
  f.tag = static_cast<CaseTag>(get<std::uint32_t>(in));
  f.lambda = get<double>(in);
  f.sigma = get<double>(in);
  f.dt = get<double>(in);
  f.residual = get<double>(in);
  f.steps = get<std::uint64_t>(in);
  f.soundness_tol = get<double>(in);
  f.lower_bound_certified = get<std::uint32_t>(in) != 0;
  Vec lo(n), hi(n), h(n);
  for (std::uint32_t d = 0; d < n; ++d) {
    lo[d] = get<double>(in);
    hi[d] = get<double>(in);
    h[d] = get<double>(in);
  }
  f.grid = GridSpec(Box(lo, hi), h);
  std::uint64_t nt = get<std::uint64_t>(in);
  f.times.resize(nt);
  for (auto& t : f.times) t = get<double>(in);
  f.values.assign(nt, std::vector<double>(f.grid.total));
  for (auto& slice : f.values) {
    in.read(reinterpret_cast<char*>(slice.data()),
            static_cast<std::streamsize>(slice.size() * sizeof(double)));
    if (!in) throw std::runtime_error("ValueField: truncated binary file " + path);
  }
  return f;
}

}  // namespace stabopt
