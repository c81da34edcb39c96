#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "stabopt/grid.hpp"
#include "stabopt/value_field.hpp"

using namespace stabopt;

TEST_CASE("grid construction and validation") {
  GridSpec g = make_grid(Box({-2.0}, {2.0}), 0.005);
  CHECK(g.counts[0] == 801);
  CHECK(g.total == 801);
  CHECK(g.node(400)[0] == doctest::Approx(0.0).epsilon(1e-14));

  GridSpec g2 = make_grid(Box({-1.0, -1.0}, {1.0, 1.0}), 0.1);
  CHECK(g2.counts[0] == 21);
  CHECK(g2.total == 441);
  CHECK(g2.flatten({3, 5}) == 3 + 5 * 21);
  Vec n = g2.node(g2.flatten({3, 5}));
  CHECK(n[0] == doctest::Approx(-0.7));
  CHECK(n[1] == doctest::Approx(-0.5));

  // Spacing must divide the width; axes need at least 16 nodes.
  CHECK_THROWS_AS(make_grid(Box({0.0}, {1.0}), 0.3), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(Box({0.0}, {1.0}), 0.5), std::invalid_argument);
}

TEST_CASE("interpolation is exact on affine data") {
  GridSpec g = make_grid(Box({-1.0, 0.0}, {1.0, 2.0}), 0.125);
  std::vector<double> vals(g.total);
  for (std::size_t i = 0; i < g.total; ++i) {
    Vec x = g.node(i);
    vals[i] = 3.0 * x[0] - 0.5 * x[1] + 1.0;
  }
  for (Vec x : {Vec{0.3, 0.7}, Vec{-0.99, 1.99}, Vec{0.0, 0.0}, Vec{1.0, 2.0}}) {
    CHECK(g.interpolate(vals, x) == doctest::Approx(3.0 * x[0] - 0.5 * x[1] + 1.0).epsilon(1e-12));
  }
  std::vector<std::size_t> base;
  Vec frac;
  CHECK_THROWS_AS(g.locate({1.5, 0.5}, base, frac), std::domain_error);
}

TEST_CASE("case names round trip") {
  for (CaseTag t : {CaseTag::EvolutiveDiscounted, CaseTag::StationaryDiscounted,
                    CaseTag::EvolutiveUndiscounted}) {
    CHECK(case_from_name(case_name(t)) == t);
  }
  CHECK_THROWS_AS(case_from_name("no_such_case"), std::invalid_argument);
}

static ValueField sample_field() {
  ValueField f;
  f.grid = make_grid(Box({-1.0}, {1.0}), 0.125);
  f.tag = CaseTag::EvolutiveDiscounted;
  f.lambda = 0.25;
  f.sigma = 1.5;
  f.dt = 0.01;
  f.residual = 3e-7;
  f.steps = 200;
  f.soundness_tol = 0.05;
  f.times = {0.0, 1.0, 2.0};
  for (int s = 0; s < 3; ++s) {
    std::vector<double> u(f.grid.total);
    for (std::size_t i = 0; i < f.grid.total; ++i) u[i] = std::sin(0.37 * i + s);
    f.values.push_back(std::move(u));
  }
  return f;
}

TEST_CASE("field csv round trip") {
  ValueField f = sample_field();
  f.save_csv("field_rt_test.csv");
  ValueField r = ValueField::load_csv("field_rt_test.csv");
  CHECK(r.tag == f.tag);
  CHECK(r.lambda == f.lambda);
  CHECK(r.sigma == f.sigma);
  CHECK(r.dt == f.dt);
  CHECK(r.times == f.times);
  CHECK(r.grid.counts == f.grid.counts);
  REQUIRE(r.values.size() == f.values.size());
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < f.grid.total; ++i) CHECK(r.values[s][i] == f.values[s][i]);
  std::remove("field_rt_test.csv");
}

TEST_CASE("field binary round trip") {
  ValueField f = sample_field();
  f.save_binary("field_rt_test.bin");
  ValueField r = ValueField::load_binary("field_rt_test.bin");
  CHECK(r.lambda == f.lambda);
  CHECK(r.soundness_tol == f.soundness_tol);
  CHECK(r.steps == f.steps);
  CHECK(r.values == f.values);
  CHECK(r.times == f.times);
  CHECK(r.value_at({0.3}, 1.5) == doctest::Approx(f.value_at({0.3}, 1.5)).epsilon(1e-15));
  std::remove("field_rt_test.bin");
}

TEST_CASE("field time interpolation and gradients") {
  ValueField f = sample_field();
  // value_at blends the two bracketing slices linearly in t.
  double lo = f.grid.interpolate(f.values[1], {0.25});
  double hi = f.grid.interpolate(f.values[2], {0.25});
  CHECK(f.value_at({0.25}, 1.25) == doctest::Approx(0.75 * lo + 0.25 * hi).epsilon(1e-12));

  // Gradient of affine data is the slope.
  ValueField g;
  g.grid = make_grid(Box({-1.0}, {1.0}), 0.125);
  g.tag = CaseTag::StationaryDiscounted;
  g.lambda = 1.0;
  g.times = {0.0};
  std::vector<double> u(g.grid.total);
  for (std::size_t i = 0; i < g.grid.total; ++i) u[i] = 2.0 * g.grid.node(i)[0] - 0.3;
  g.values.push_back(u);
  CHECK(g.gradient_at({0.31})[0] == doctest::Approx(2.0).epsilon(1e-10));
}
