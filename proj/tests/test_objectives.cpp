#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "stabopt/objective.hpp"

using namespace stabopt;

TEST_CASE("benchmark catalog") {
  auto names = benchmark_names();
  CHECK(names.size() == 4);
  for (const auto& n : names) CHECK_NOTHROW(make_benchmark(n));
  CHECK_THROWS_AS(make_benchmark("no_such_landscape"), std::invalid_argument);
}

TEST_CASE("double well basics") {
  Objective dw = make_benchmark("double_well_1d");
  CHECK(dw.dim == 1);
  CHECK(dw({1.0}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dw({-1.0}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dw({0.0}) == doctest::Approx(1.0));
  CHECK(dw({0.5}) == doctest::Approx(0.5625));
  CHECK(dw.sup_norm == doctest::Approx(1.0));
  CHECK(dw.lower_bound == 0.0);
  REQUIRE(dw.minimizers.has_value());
  CHECK(dw.minimizers->points.size() == 2);
  CHECK(distance_to_minimizers(dw, {0.0}) == doctest::Approx(1.0));
  CHECK(distance_to_minimizers(dw, {1.3}) == doctest::Approx(0.3));
}

TEST_CASE("clipped well respects the dimension parameter") {
  Objective cw = make_benchmark("clipped_well_nd", {{"n", 3.0}});
  CHECK(cw.dim == 3);
  CHECK(cw({0.0, 0.0, 0.0}) == 0.0);
  CHECK(cw({0.5, 0.0, 0.0}) == doctest::Approx(0.25));
  CHECK(cw({2.0, 2.0, 2.0}) == doctest::Approx(1.0));  // clipped
  CHECK(cw.radial.has_value());
  CHECK_THROWS_AS(make_benchmark("clipped_well_nd", {{"n", 4.0}}), std::invalid_argument);
}

TEST_CASE("two pit minimizers") {
  Objective tp = make_benchmark("two_pit_2d");
  REQUIRE(tp.minimizers.has_value());
  REQUIRE(tp.minimizers->points.size() == 2);
  CHECK(tp(tp.minimizers->points[0]) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(tp(tp.minimizers->points[1]) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(distance_to_minimizers(tp, {0.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("separation gap frozen values") {
  Objective dw = make_benchmark("double_well_1d");
  // Exact exterior minima of the quartic at distance delta from +-1.
  CHECK(separation_gap(dw, 0.5, 0.125) == doctest::Approx(0.5625).epsilon(1e-12));
  CHECK(separation_gap(dw, 0.25, 0.0625) == doctest::Approx(0.19140625).epsilon(1e-12));
  CHECK(separation_gap(dw, 0.1, 0.025) == doctest::Approx(0.0361).epsilon(1e-12));

  Objective tp = make_benchmark("two_pit_2d");
  CHECK(separation_gap(tp, 0.3, 0.075) == doctest::Approx(0.090625).epsilon(1e-9));

  // Whole-domain minimizer set leaves no exterior.
  Objective cst = make_benchmark("constant");
  CHECK(separation_gap(cst, 0.3, 0.075) == std::numeric_limits<double>::infinity());
}

TEST_CASE("separation gap grows with delta") {
  Objective dw = make_benchmark("double_well_1d");
  double prev = 0.0;
  for (double d : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    double g = separation_gap(dw, d, d / 4.0);
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("separation gap rejects coarse resolution") {
  Objective dw = make_benchmark("double_well_1d");
  CHECK_THROWS_AS(separation_gap(dw, 0.1, 0.05), std::invalid_argument);
}

TEST_CASE("mollify reproduces constants and tracks the original") {
  Objective cst = make_benchmark("constant", {{"c", 2.5}});
  Objective mc = mollify(cst, 0.05);
  CHECK(mc({0.3}) == doctest::Approx(2.5).epsilon(1e-12));

  Objective dw = make_benchmark("double_well_1d");
  Objective md = mollify(dw, 0.01);
  CHECK(md.params.count("kernel_grad_integral") == 1);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    double x = -2.0 + 4.0 * i / 100.0;
    worst = std::max(worst, std::abs(md({x}) - dw({x})));
  }
  // Lipschitz constant of the well is ~1.54, kernel radius 0.01.
  CHECK(worst <= 0.016);
}

TEST_CASE("tabulated objective from csv") {
  const char* path = "tab_objective_test.csv";
  {
    std::ofstream out(path);
    out << "x,value\n";
    for (int i = 0; i <= 20; ++i) {
      double x = -1.0 + 0.1 * i;
      out << x << "," << x * x << "\n";
    }
  }
  Objective tab = load_tabulated_csv(path);
  CHECK(tab.dim == 1);
  CHECK(tab({0.5}) == doctest::Approx(0.25).epsilon(1e-12));
  // Multilinear between nodes: chord of x^2 over [0, 0.1].
  CHECK(tab({0.05}) == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(tab({5.0}) == doctest::Approx(1.0).epsilon(1e-12));  // clamped to the grid box

  CHECK_FALSE(tab.minimizers.has_value());
  locate_minimizers(tab, 0.1);
  REQUIRE(tab.minimizers.has_value());
  CHECK(tab.minimizers->approximate);
  CHECK(distance_to_minimizers(tab, {0.4}) == doctest::Approx(0.4).epsilon(1e-9));
  std::remove(path);
}
