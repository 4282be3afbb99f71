#include <benchmark/benchmark.h>

#include <random>

#include "acf/ncc.hpp"
#include "acf/patch_db.hpp"

namespace {

acf::ImagePatch noise(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  acf::ImagePatch img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
  return img;
}

// Locating one button-sized patch on a full screenshot (argument: screen width).
void BM_LocateOnScreen(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const acf::ImagePatch screen = noise(w, w * 5 / 8, 1);
  const acf::ImagePatch patch = screen.crop({w / 3, w / 5, 48, 24});
  for (auto _ : state) benchmark::DoNotOptimize(acf::locate_on_screen(patch, screen, 0.97));
  state.SetItemsProcessed(state.iterations() * screen.width * screen.height);
}
BENCHMARK(BM_LocateOnScreen)->Arg(640)->Arg(1280)->Unit(benchmark::kMillisecond);

// Matching a fresh crop against a store of N patches of similar size. Noise
// patches share one mean colour, so the prefilter passes every candidate.
void BM_PatchDbMatch(benchmark::State& state) {
  acf::PatchDb db;
  for (int i = 0; i < state.range(0); ++i) db.insert(noise(56, 32, 100 + static_cast<std::uint64_t>(i)));
  const acf::ImagePatch probe = noise(56, 32, 7);
  for (auto _ : state) benchmark::DoNotOptimize(db.match(probe));
}
BENCHMARK(BM_PatchDbMatch)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace
