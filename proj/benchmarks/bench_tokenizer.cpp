#include <benchmark/benchmark.h>

#include <vector>

#include "acf/tokenizer.hpp"

namespace {

// Typing with occasional shortcuts, clicks and scroll bursts.
std::vector<acf::InputEvent> event_stream(int n) {
  std::vector<acf::InputEvent> out;
  std::int64_t t = 0;
  const auto add = [&](acf::EventKind kind, const std::string& key) {
    acf::InputEvent e;
    e.kind = kind;
    e.key = key;
    e.timestamp_ms = t += 40;
    e.app_id = "editor";
    e.window = {0, 0, 1280, 800};
    e.cursor = {static_cast<int>(t % 1280), static_cast<int>(t % 800)};
    e.scroll_delta = -1;
    out.push_back(e);
  };
  for (int i = 0; out.size() < static_cast<std::size_t>(n); ++i) {
    switch (i % 10) {
      case 0:
        add(acf::EventKind::key_down, "CTRL");
        add(acf::EventKind::key_down, "S");
        add(acf::EventKind::key_up, "S");
        add(acf::EventKind::key_up, "CTRL");
        break;
      case 1:
        add(acf::EventKind::mouse_down, "");
        add(acf::EventKind::mouse_up, "");
        break;
      case 2:
        for (int k = 0; k < 5; ++k) add(acf::EventKind::scroll, "");
        break;
      default:
        add(acf::EventKind::key_down, std::string(1, static_cast<char>('A' + i % 26)));
        add(acf::EventKind::key_up, std::string(1, static_cast<char>('A' + i % 26)));
    }
  }
  return out;
}

void BM_TokenizeToRecords(benchmark::State& state) {
  const auto events = event_stream(static_cast<int>(state.range(0)));
  const auto resolver = acf::no_patch_resolver();
  for (auto _ : state) benchmark::DoNotOptimize(acf::tokenize_to_records(events, resolver));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_TokenizeToRecords)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace
