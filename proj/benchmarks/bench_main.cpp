// Microbenchmarks for the hot paths: scheme marching, trajectory cost and
// gradient, interpolation queries, measure construction. Run manually; not
// part of the test suite.
#include <benchmark/benchmark.h>

#include "stabopt/control.hpp"
#include "stabopt/hjb.hpp"
#include "stabopt/objective.hpp"
#include "stabopt/occupation.hpp"

using namespace stabopt;

namespace {

const Objective& double_well() {
  static Objective obj = make_benchmark("double_well_1d");
  return obj;
}

const Objective& two_pit() {
  static Objective obj = make_benchmark("two_pit_2d");
  return obj;
}

Trajectory sample_trajectory(double horizon, double dt) {
  const Objective& obj = double_well();
  GridSpec g = make_grid(obj.domain, 0.02);
  double lambda = 0.1;
  static ValueField field = solve_stationary(obj, lambda, g, cfl_limit(g, scheme_sigma(obj), lambda), 1e-6);
  return rollout_feedback(field, obj, {0.5}, dt, horizon);
}

void bm_evolutive_march_1d(benchmark::State& state) {
  const Objective& obj = double_well();
  GridSpec g = make_grid(obj.domain, 4.0 / static_cast<double>(state.range(0)));
  double lambda = 0.1;
  double cfl = cfl_limit(g, scheme_sigma(obj), lambda);
  double horizon = 64 * cfl;  // fixed step count so items/sec compares grids
  for (auto _ : state) {
    ValueField f = solve_evolutive(obj, lambda, g, horizon, cfl);
    benchmark::DoNotOptimize(f.values.back().front());
  }
  state.SetItemsProcessed(state.iterations() * 64 * static_cast<std::int64_t>(g.total));
}

void bm_evolutive_march_2d(benchmark::State& state) {
  const Objective& obj = two_pit();
  GridSpec g = make_grid(obj.domain, 4.0 / static_cast<double>(state.range(0)));
  double lambda = 0.1;
  double cfl = cfl_limit(g, scheme_sigma(obj), lambda);
  double horizon = 16 * cfl;
  for (auto _ : state) {
    ValueField f = solve_evolutive(obj, lambda, g, horizon, cfl);
    benchmark::DoNotOptimize(f.values.back().front());
  }
  state.SetItemsProcessed(state.iterations() * 16 * static_cast<std::int64_t>(g.total));
}

void bm_trajectory_cost(benchmark::State& state) {
  const Objective& obj = double_well();
  Trajectory traj = sample_trajectory(static_cast<double>(state.range(0)), 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(trajectory_cost(obj, traj));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traj.steps()));
}

void bm_cost_gradient(benchmark::State& state) {
  const Objective& obj = double_well();
  Trajectory traj = sample_trajectory(static_cast<double>(state.range(0)), 0.05);
  for (auto _ : state) {
    auto g = cost_gradient(obj, traj);
    benchmark::DoNotOptimize(g.front()[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traj.steps()));
}

void bm_value_query(benchmark::State& state) {
  const Objective& obj = two_pit();
  GridSpec g = make_grid(obj.domain, 0.05);
  double lambda = 0.1;
  ValueField f = solve_stationary(obj, lambda, g, cfl_limit(g, scheme_sigma(obj), lambda), 1e-5);
  double x = -1.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.gradient_at({x, 0.3})[0]);
    x += 0.001;
    if (x > 1.9) x = -1.9;
  }
  state.SetItemsProcessed(state.iterations());
}

void bm_build_measure(benchmark::State& state) {
  Trajectory traj = sample_trajectory(120.0, 0.05);
  for (auto _ : state) {
    auto m = build_measure(traj, MeasureCase::InfiniteDiscounted, 0.1);
    benchmark::DoNotOptimize(m.samples.back().weight);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traj.steps()));
}

}  // namespace

BENCHMARK(bm_evolutive_march_1d)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_evolutive_march_2d)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_trajectory_cost)->Arg(30)->Arg(120);
BENCHMARK(bm_cost_gradient)->Arg(30)->Arg(120);
BENCHMARK(bm_value_query);
BENCHMARK(bm_build_measure);

BENCHMARK_MAIN();
