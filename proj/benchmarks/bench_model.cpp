#include <benchmark/benchmark.h>

#include "acf/model.hpp"

namespace {

acf::Model make_model(acf::CellType cell, int hidden, acf::Window& window) {
  acf::TrainingConfig cfg;
  cfg.cell = cell;
  cfg.hidden_size = hidden;
  const acf::ModelDims dims{200, 8};
  acf::Model model(cfg, dims);
  model.initialize(1);
  window.clear();
  for (int i = 0; i < cfg.n_past; ++i) {
    acf::StepInput s;
    s.action = 2 + i * 17 % 198;
    s.context = Eigen::VectorXd::Zero(dims.context_size());
    s.context(i % 8) = 1.0;
    s.context(8) = 0.25;
    s.context(9) = 0.75;
    window.push_back(s);
  }
  return model;
}

void BM_Forward(benchmark::State& state) {
  acf::Window window;
  const auto model = make_model(static_cast<acf::CellType>(state.range(0)), static_cast<int>(state.range(1)), window);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(window));
}
BENCHMARK(BM_Forward)->ArgsProduct({{0, 1}, {64, 600}})->ArgNames({"lstm", "hidden"})->Unit(benchmark::kMicrosecond);

void BM_Gradient(benchmark::State& state) {
  acf::Window window;
  const auto model = make_model(static_cast<acf::CellType>(state.range(0)), static_cast<int>(state.range(1)), window);
  acf::ParameterSet grad = model.params().zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(model.accumulate_gradient(window, 5, grad));
}
BENCHMARK(BM_Gradient)->ArgsProduct({{0, 1}, {64, 600}})->ArgNames({"lstm", "hidden"})->Unit(benchmark::kMicrosecond);

}  // namespace
