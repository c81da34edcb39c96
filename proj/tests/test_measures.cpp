#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "stabopt/control.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/occupation.hpp"

using namespace stabopt;

namespace {

Trajectory straight_line(double x0, double speed, double t, std::size_t steps, double lambda,
                         const Box& box) {
  std::vector<Vec> a(steps, Vec{speed});
  return integrate({x0}, a, t / double(steps), box, lambda);
}

}  // namespace

TEST_CASE("case mapping and names") {
  CHECK(measure_case_for(CaseTag::EvolutiveDiscounted) == MeasureCase::FiniteDiscounted);
  CHECK(measure_case_for(CaseTag::StationaryDiscounted) == MeasureCase::InfiniteDiscounted);
  CHECK(measure_case_for(CaseTag::EvolutiveUndiscounted) == MeasureCase::TimeAverage);
  for (MeasureCase m : {MeasureCase::FiniteDiscounted, MeasureCase::InfiniteDiscounted,
                        MeasureCase::TimeAverage}) {
    CHECK(measure_case_from_name(measure_case_name(m)) == m);
  }
  CHECK_THROWS_AS(measure_case_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("normalization per case") {
  Objective dw = make_benchmark("double_well_1d");
  Trajectory tr = straight_line(-0.5, 0.5, 2.0, 2000, 1.0, dw.domain);

  OccupationMeasure fin = build_measure(tr, MeasureCase::FiniteDiscounted, 1.0);
  CHECK(fin.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fin.tail_mass == 0.0);

  OccupationMeasure inf_ = build_measure(tr, MeasureCase::InfiniteDiscounted, 1.0);
  CHECK(inf_.total_mass() + inf_.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inf_.tail_mass == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

  Trajectory tu = straight_line(-0.5, 0.5, 2.0, 2000, 0.0, dw.domain);
  OccupationMeasure avg = build_measure(tu, MeasureCase::TimeAverage, 0.0);
  CHECK(avg.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("discount weighting of a crossing time") {
  // y(s) = s - 0.5 crosses 0.5 exactly at s = 1; the discounted fraction of
  // the first second is (1-e^{-1})/(1-e^{-2}).
  Objective dw = make_benchmark("double_well_1d");
  Trajectory tr = straight_line(-0.5, 1.0, 2.0, 2000, 1.0, dw.domain);
  OccupationMeasure m = build_measure(tr, MeasureCase::FiniteDiscounted, 1.0);
  double mass = measure_set(m, [](const Vec& x) { return x[0] < 0.5; });
  double exact = (1.0 - std::exp(-1.0)) / (1.0 - std::exp(-2.0));
  CHECK(mass == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("case and discount must agree") {
  Objective dw = make_benchmark("double_well_1d");
  Trajectory tr = straight_line(0.0, 0.1, 1.0, 100, 0.5, dw.domain);
  CHECK_THROWS_AS(build_measure(tr, MeasureCase::TimeAverage, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_measure(tr, MeasureCase::FiniteDiscounted, 0.0), std::invalid_argument);
}

TEST_CASE("horizon restriction") {
  Objective dw = make_benchmark("double_well_1d");
  Trajectory tr = straight_line(-0.5, 1.0, 2.0, 2000, 1.0, dw.domain);

  OccupationMeasure first = build_measure(tr, MeasureCase::FiniteDiscounted, 1.0, 1.0);
  CHECK(first.horizon == doctest::Approx(1.0));
  CHECK(first.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  // Everything in [0,1) sits left of 0.5.
  CHECK(measure_set(first, [](const Vec& x) { return x[0] < 0.5; }) ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(build_measure(tr, MeasureCase::FiniteDiscounted, 1.0, 0.7503),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_measure(tr, MeasureCase::FiniteDiscounted, 1.0, 3.0),
                  std::invalid_argument);
}

TEST_CASE("mass outside the sub-level set uses a strict excess") {
  Objective dw = make_benchmark("double_well_1d");
  // Sitting on the hill: f = 1 everywhere on the path, lower bound 0.
  Trajectory tr = straight_line(0.0, 0.0, 1.0, 100, 1.0, dw.domain);
  OccupationMeasure m = build_measure(tr, MeasureCase::FiniteDiscounted, 1.0);
  CHECK(mass_outside(m, dw, 1.0) == 0.0);  // f > 1 nowhere
  CHECK(mass_outside(m, dw, 0.999) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("variation bounds, frozen values") {
  auto small = tv_bounds(0.01, 1.0);
  CHECK(small.first == doctest::Approx(1.980099667).epsilon(1e-9));
  CHECK(small.second == doctest::Approx(0.009991708236).epsilon(1e-9));
  auto mid = tv_bounds(0.5, 4.0);
  CHECK(mid.first == doctest::Approx(0.2706705665).epsilon(1e-9));
  CHECK(mid.second == doctest::Approx(1.880702927).epsilon(1e-9));
  // The small-discount gap vanishes as lambda t -> 0.
  CHECK(tv_bounds(1e-9, 1.0).second <= 1e-8);
}

TEST_CASE("histogram partitions the mass") {
  Objective dw = make_benchmark("double_well_1d");
  Trajectory tr = straight_line(-1.0, 1.0, 2.0, 1000, 0.0, dw.domain);
  OccupationMeasure m = build_measure(tr, MeasureCase::TimeAverage, 0.0);
  Box box({-2.0}, {2.0});
  auto bins = histogram(m, box, 4);
  REQUIRE(bins.size() == 4);
  double total = 0.0;
  for (double b : bins) total += b;
  CHECK(total == doctest::Approx(m.total_mass()).epsilon(1e-12));
  // Path covers [-1, 1] uniformly in time: half in each middle bin.
  CHECK(bins[0] == 0.0);
  CHECK(bins[1] == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(bins[2] == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(bins[3] == 0.0);

  Box tight({-0.5}, {0.5});
  CHECK_THROWS_AS(histogram(m, tight, 4), std::invalid_argument);
}

TEST_CASE("empirical variation distance") {
  Objective dw = make_benchmark("double_well_1d");
  Box box({-2.0}, {2.0});
  Trajectory a = straight_line(-1.5, 0.0, 1.0, 100, 0.0, dw.domain);
  Trajectory b = straight_line(1.5, 0.0, 1.0, 100, 0.0, dw.domain);
  OccupationMeasure ma = build_measure(a, MeasureCase::TimeAverage, 0.0);
  OccupationMeasure mb = build_measure(b, MeasureCase::TimeAverage, 0.0);
  CHECK(empirical_tv(ma, ma, box, 8) == doctest::Approx(0.0));
  CHECK(empirical_tv(ma, mb, box, 8) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("monte carlo agrees with the exact mass") {
  Objective dw = make_benchmark("double_well_1d");
  Trajectory tr = straight_line(-0.5, 1.0, 2.0, 2000, 1.0, dw.domain);
  auto in_set = [](const Vec& x) { return x[0] < 0.5; };
  OccupationMeasure m = build_measure(tr, MeasureCase::FiniteDiscounted, 1.0);
  double exact = measure_set(m, in_set);
  int n = 100000;
  double mc = monte_carlo_check(tr, MeasureCase::FiniteDiscounted, 1.0, n, 20260816u, in_set,
                                dw.domain);
  CHECK(std::abs(mc - exact) <= 3.0 / std::sqrt(double(n)));
  // Deterministic per seed.
  CHECK(mc == monte_carlo_check(tr, MeasureCase::FiniteDiscounted, 1.0, n, 20260816u, in_set,
                                dw.domain));
  CHECK_THROWS_AS(monte_carlo_check(tr, MeasureCase::FiniteDiscounted, 1.0, 10, 1u, in_set,
                                    dw.domain),
                  std::invalid_argument);
}

TEST_CASE("monte carlo extension freezes the final control") {
  Objective dw = make_benchmark("double_well_1d");
  // Two-second path ending at 1.5 still moving right; draws past the horizon
  // ride the frozen control into the wall at 2 and stay inside the box.
  Trajectory tr = straight_line(-0.5, 1.0, 2.0, 200, 0.25, dw.domain);
  double mc = monte_carlo_check(tr, MeasureCase::InfiniteDiscounted, 0.25, 20000, 7u,
                                [](const Vec& x) { return x[0] >= 1.5; }, dw.domain);
  // At least the tail mass e^{-0.5} lands at or beyond 1.5.
  CHECK(mc >= std::exp(-0.5) - 0.02);
  CHECK(mc <= 1.0);
}

TEST_CASE("measure csv carries the metadata") {
  Objective dw = make_benchmark("double_well_1d");
  Trajectory tr = straight_line(0.0, 0.5, 1.0, 100, 0.5, dw.domain);
  OccupationMeasure m = build_measure(tr, MeasureCase::InfiniteDiscounted, 0.5);
  save_measure_csv("measure_rt_test.csv", m);
  std::FILE* f = std::fopen("measure_rt_test.csv", "r");
  REQUIRE(f != nullptr);
  char line[256];
  REQUIRE(std::fgets(line, sizeof line, f) != nullptr);
  std::string head(line);
  CHECK(head.find("infinite_discounted") != std::string::npos);
  CHECK(head.find("tail_mass") != std::string::npos);
  std::fclose(f);
  std::remove("measure_rt_test.csv");
}
