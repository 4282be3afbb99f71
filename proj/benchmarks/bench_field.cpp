#include <benchmark/benchmark.h>

#include <vector>

#include "acf/attraction.hpp"

namespace {

std::vector<acf::AttractionTarget> targets(int n) {
  std::vector<acf::AttractionTarget> out;
  for (int i = 0; i < n; ++i) {
    const acf::Rect r{40 + 150 * (i % 8), 60 + 120 * (i / 8), 48, 24};
    out.push_back({r.center(), r, 1.0 / (i + 1)});
  }
  return out;
}

// One pointer-motion event with the top-k predictions as targets.
void BM_ApplyMotion(benchmark::State& state) {
  const auto ts = targets(static_cast<int>(state.range(0)));
  const acf::FieldConfig cfg;
  double x = 0.0;
  for (auto _ : state) {
    x = x > 1200 ? 0.0 : x + 3.0;
    benchmark::DoNotOptimize(acf::apply_motion({x - 3.0, 300}, {x, 300}, ts, cfg, acf::Rect{0, 0, 1280, 800}));
  }
}
BENCHMARK(BM_ApplyMotion)->Arg(1)->Arg(5)->Arg(20);

void BM_SampleField(benchmark::State& state) {
  const auto ts = targets(5);
  const acf::FieldConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(acf::sample_field({0, 0}, 80, 50, 16.0, ts, cfg));
  state.SetItemsProcessed(state.iterations() * 80 * 50);
}
BENCHMARK(BM_SampleField)->Unit(benchmark::kMicrosecond);

}  // namespace
