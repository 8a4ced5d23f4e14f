#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "viscoctl/carleman.hpp"
#include "viscoctl/control.hpp"

using namespace viscoctl;

namespace {

MovingRegion sweep_1d(int nodes, int steps) {
  const Grid g = Grid::build(1, {1.0}, {nodes}, 1.0, steps);
  const RegionSpec spec = RegionSpec::nested(Shape::interval(-0.3, 0.3), 0.05, 0.1);
  return build_moving_region(FlowField::translation(Point(0.85, 0.0)), spec, g);
}

ProblemSpec bumpy(const Grid& g) {
  return ProblemSpec::from_function(g, [](const Point& x) { return 2.0 + 0.5 * std::sin(2 * std::numbers::pi * x.x()); });
}

void BM_CoupledForward2D(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid g = Grid::build(2, {1.0, 1.0}, {n, n}, 1.0, 100);
  const ProblemSpec spec = bumpy(g);
  const Field y0 = g.sample([](const Point& x) { return std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y()); });
  const auto chi = fixed_masks(g, NodeMask(std::size_t(g.size()), 0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_coupled_forward(g, spec, y0, y0, chi));
}
BENCHMARK(BM_CoupledForward2D)->Arg(11)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_GramianApply(benchmark::State& state) {
  const MovingRegion r = sweep_1d(int(state.range(0)), 150);
  const ControlSystem sys = coupled_system(r.grid, bumpy(r.grid), control_masks(r));
  const Field w = Field::Ones(sys.state_size());
  for (auto _ : state) benchmark::DoNotOptimize(sys.gramian(w));
}
BENCHMARK(BM_GramianApply)->Arg(31)->Arg(61)->Arg(121)->Unit(benchmark::kMicrosecond);

void BM_AnalyzeGeometry(benchmark::State& state) {
  const MovingRegion r = sweep_1d(61, int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analyze_geometry(r));
}
BENCHMARK(BM_AnalyzeGeometry)->Arg(75)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_BuildPsi(benchmark::State& state) {
  const MovingRegion r = sweep_1d(61, 150);
  const GeometryReport geo = analyze_geometry(r);
  for (auto _ : state) benchmark::DoNotOptimize(build_psi(r, geo));
}
BENCHMARK(BM_BuildPsi)->Unit(benchmark::kMillisecond);

void BM_CarlemanSweep(benchmark::State& state) {
  const MovingRegion r = sweep_1d(61, 150);
  const WeightSet ws = build_psi(r, analyze_geometry(r));
  const ProblemSpec spec = bumpy(r.grid);
  CarlemanSweepOptions opt;
  opt.ensemble = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(carleman_sweep(r, ws, spec, opt));
}
BENCHMARK(BM_CarlemanSweep)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ObservabilityEstimate(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid g = Grid::build(1, {1.0}, {n}, 1.5, 15 * (n - 1) / 2);
  const RegionSpec spec = RegionSpec::nested(Shape::interval(-0.25, 0.25), 0.05, 0.1);
  const MovingRegion r = build_moving_region(FlowField::translation(Point(1.0, 0.0)), spec, g);
  const ControlSystem sys = coupled_system(g, bumpy(g), control_masks(r));
  ObservabilityOptions opt;
  opt.q_only = true;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_observability_constant(sys, opt));
}
BENCHMARK(BM_ObservabilityEstimate)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
