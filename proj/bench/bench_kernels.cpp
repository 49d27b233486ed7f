// OpenMP kernels against their serial references on the default grid.

#include <benchmark/benchmark.h>

#include <cmath>

#include "fracsys/bubbles.hpp"
#include "fracsys/decomposition.hpp"
#include "fracsys/kernels.hpp"

using namespace fracsys;

namespace {

const SystemParams P{2.0, 3.0};

FieldPair bubble_pair(int n) {
  GridSpec g;
  g.n = n;
  return ground_state_pair(ground_state_amplitude(P), BubbleParams{{0.0, 0.0}, 0.5, 1.0}, P, g);
}

template <bool Serial>
void BM_sum(benchmark::State& st) {
  auto p = bubble_pair(static_cast<int>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(Serial ? kernels::serial::sum(p.u.values()) : kernels::sum(p.u.values()));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Serial>
void BM_dot(benchmark::State& st) {
  auto p = bubble_pair(static_cast<int>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(Serial ? kernels::serial::dot(p.u.values(), p.v.values())
                                    : kernels::dot(p.u.values(), p.v.values()));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Serial>
void BM_coupling(benchmark::State& st) {
  auto p = bubble_pair(static_cast<int>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(Serial ? kernels::serial::sum_coupling(p.u.values(), p.v.values(), 2.0, 3.0, true)
                                    : kernels::sum_coupling(p.u.values(), p.v.values(), 2.0, 3.0, true));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Serial>
void BM_rescale(benchmark::State& st) {
  auto p = bubble_pair(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    Field r = Serial ? serial::rescale_translate(p.u, 0.5, {0.25, 0.0}) : rescale_translate(p.u, 0.5, {0.25, 0.0});
    benchmark::DoNotOptimize(r.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Serial>
void BM_morrey(benchmark::State& st) {
  auto p = bubble_pair(static_cast<int>(st.range(0)));
  auto radii = dyadic_ladder(p.grid());
  for (auto _ : st) benchmark::DoNotOptimize(Serial ? serial::morrey_scan(p, radii) : morrey_scan(p, radii));
}

}  // namespace

BENCHMARK(BM_sum<true>)->Arg(4096)->Arg(1 << 16)->Name("sum/serial");
BENCHMARK(BM_sum<false>)->Arg(4096)->Arg(1 << 16)->Name("sum/omp");
BENCHMARK(BM_dot<true>)->Arg(4096)->Arg(1 << 16)->Name("dot/serial");
BENCHMARK(BM_dot<false>)->Arg(4096)->Arg(1 << 16)->Name("dot/omp");
BENCHMARK(BM_coupling<true>)->Arg(4096)->Arg(1 << 16)->Name("coupling/serial");
BENCHMARK(BM_coupling<false>)->Arg(4096)->Arg(1 << 16)->Name("coupling/omp");
BENCHMARK(BM_rescale<true>)->Arg(1024)->Arg(4096)->Name("rescale/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rescale<false>)->Arg(1024)->Arg(4096)->Name("rescale/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_morrey<true>)->Arg(4096)->Name("morrey_scan/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_morrey<false>)->Arg(4096)->Name("morrey_scan/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
