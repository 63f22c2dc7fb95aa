// Serial reference vs OpenMP path for the data-parallel kernels.
// The second benchmark argument selects the path: 0 serial, 1 parallel.

#include "eccbf/geometry.hpp"
#include "eccbf/qp.hpp"
#include "eccbf/safety_filters.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

namespace {

using namespace eccbf;

kernels::Exec exec_of(const benchmark::State& state) {
  return state.range(1) ? kernels::Exec::Parallel : kernels::Exec::Serial;
}

ExtentFunction ellipse_extent() {
  const Eigen::Matrix2d P = Eigen::Vector2d(1.0 / (0.15 * 0.15), 1.0 / (0.1 * 0.1)).asDiagonal();
  return ExtentFunction::ellipse(P, 3, 2);
}

std::vector<double> angles(std::size_t n) {
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return a;
}

void BM_TraceBoundary(benchmark::State& state) {
  const auto extent = ellipse_extent();
  const auto a = angles(static_cast<std::size_t>(state.range(0)));
  const Vector x = Eigen::Vector3d(0.3, -0.2, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(trace_boundary(extent, x, a, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CoveringRadius(benchmark::State& state) {
  const auto extent = ellipse_extent();
  const Vector x = Vector::Zero(3);
  const auto samples = trace_boundary(extent, x, angles(200));
  const auto probes = trace_boundary(extent, x, angles(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(covering_radius(samples, probes, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SampleBoundary(benchmark::State& state) {
  const auto extent = ellipse_extent();
  BoundaryNetOptions options;
  options.exec = exec_of(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_boundary(extent, Vector::Zero(3), static_cast<std::size_t>(state.range(0)), options));
}

void BM_OracleScan(benchmark::State& state) {
  qp::HalfspaceQP p;
  p.ball_radius = 1.0;
  p.target = Vector(Point2(1.2, 0.7));
  p.rows.push_back({Vector(Point2(-1.0, 0.2)), -0.3});
  p.rows.push_back({Vector(Point2(0.1, -1.0)), -0.4});
  for (auto _ : state) benchmark::DoNotOptimize(qp::oracle_solve(p, static_cast<int>(state.range(0)), exec_of(state)));
}

void BM_EstimateConstants(benchmark::State& state) {
  const auto extent = ellipse_extent();
  const auto h = SafeFunction::ball(Vector::Zero(2), 1.0);
  const auto sys = ControlAffineSystem::unicycle(1.0);
  EstimationOptions options;
  options.resolution = static_cast<int>(state.range(0));
  options.exec = exec_of(state);
  const EstimationDomain domain{Point2(-0.8, -0.8), Point2(0.8, 0.8)};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_constants(extent, h, sys, domain, options));
}

}  // namespace

BENCHMARK(BM_TraceBoundary)->ArgsProduct({{256, 4096}, {0, 1}});
BENCHMARK(BM_CoveringRadius)->ArgsProduct({{2000, 20000}, {0, 1}});
BENCHMARK(BM_SampleBoundary)->ArgsProduct({{64, 200}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleScan)->ArgsProduct({{401, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateConstants)->ArgsProduct({{10, 20}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
