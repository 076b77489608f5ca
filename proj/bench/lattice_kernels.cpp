// Parallel vs serial lattice kernels on a perturbed structure.

#include <benchmark/benchmark.h>

#include "g2flow/lattice.hpp"

using namespace g2;

namespace {

struct Fixture {
  Lattice lat;
  LatticeForm phi;
  MetricField metric;

  explicit Fixture(int n)
      : lat([n] {
          LatticeSpec s;
          s.sizes = {n, n};
          s.spacings = {1.0 / n, 1.0 / n};
          return s;
        }()),
        phi(perturbed_standard(lat, {{2, 3, 0.05, {1, 1}, 0.0}, {4, 6, 0.05, {1, 2}, 0.0}})),
        metric(metric_field(lat, phi)) {}
};

const Fixture& fixture(int n) {
  static const Fixture f16(16), f32(32), f64(64);
  return n == 16 ? f16 : n == 32 ? f32 : f64;
}

LatticeKernel kernel_of(const benchmark::State& st) {
  return st.range(1) ? LatticeKernel::Parallel : LatticeKernel::Serial;
}

void label(benchmark::State& st) {
  st.SetLabel(st.range(1) ? "parallel" : "serial");
  st.counters["points"] = static_cast<double>(st.range(0) * st.range(0));
}

void BM_MetricField(benchmark::State& st) {
  const auto& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(metric_field(f.lat, f.phi, kernel_of(st)));
  label(st);
}

void BM_ExteriorDerivative(benchmark::State& st) {
  const auto& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(exterior_derivative(f.lat, f.phi, kernel_of(st)));
  label(st);
}

void BM_HodgeStar(benchmark::State& st) {
  const auto& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hodge_star(f.phi, f.metric, kernel_of(st)));
  label(st);
}

void BM_LaplacianPhi(benchmark::State& st) {
  const auto& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(laplacian_phi(f.lat, f.phi, kernel_of(st)));
  label(st);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {16, 32, 64})
    for (int parallel : {0, 1}) b->Args({n, parallel});
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_MetricField)->Apply(sizes);
BENCHMARK(BM_ExteriorDerivative)->Apply(sizes);
BENCHMARK(BM_HodgeStar)->Apply(sizes);
BENCHMARK(BM_LaplacianPhi)->Apply(sizes);

BENCHMARK_MAIN();
