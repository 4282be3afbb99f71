#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"
#include "acf/synth.hpp"
#include "acf/tokenizer.hpp"
#include "support.hpp"

using namespace acf;

namespace {

// Monte Carlo oracle of profiles/benchmark.json at 10^6 steps, seed 1. The
// acceptance suite compares the trained model against this value.
constexpr double kBenchmarkOracle = 0.332665;

const std::filesystem::path kProfiles = ACF_PROFILE_DIR;

WorkflowProfile single_state(double noise) {
  return WorkflowProfile::from_json(nlohmann::json::parse(R"({
    "name": "single", "noise": )" + std::to_string(noise) + R"(,
    "states": [{"name": "s", "app": "a", "emissions": [{"action": "key:A", "p": 0.6}, {"action": "key:B", "p": 0.4}]}],
    "transition": [[1.0]]})"));
}

/// Two states in different apps, so the app observation reveals the state.
WorkflowProfile revealed_states() {
  return WorkflowProfile::from_json(nlohmann::json::parse(R"({
    "name": "revealed",
    "states": [
      {"name": "s0", "app": "a", "emissions": [{"action": "key:A", "p": 0.7}, {"action": "key:B", "p": 0.3}]},
      {"name": "s1", "app": "b", "emissions": [{"action": "key:C", "p": 1.0}]}],
    "transition": [[0.5, 0.5], [1.0, 0.0]]})"));
}

std::vector<std::string> keys_of(const std::vector<UserAction>& actions) {
  std::vector<std::string> out;
  for (const auto& a : actions) out.push_back(action_key(a));
  return out;
}

}  // namespace

TEST(Profile, BundledProfilesLoad) {
  for (const char* name : {"benchmark.json", "cycle3.json", "uniform4.json", "absorbing.json"})
    EXPECT_NO_THROW(WorkflowProfile::load(kProfiles / name)) << name;
  const auto b = WorkflowProfile::load(kProfiles / "benchmark.json");
  EXPECT_EQ(b.states.size(), 8u);
  EXPECT_TRUE(b.irreducible());
  EXPECT_FALSE(WorkflowProfile::load(kProfiles / "absorbing.json").irreducible());
}

TEST(Profile, JsonRoundTrip) {
  const auto b = WorkflowProfile::load(kProfiles / "benchmark.json");
  const auto c = WorkflowProfile::from_json(b.to_json());
  EXPECT_EQ(c.to_json(), b.to_json());
}

TEST(Profile, ValidationFailures) {
  const auto base = WorkflowProfile::load(kProfiles / "cycle3.json").to_json();
  const std::vector<std::function<void(nlohmann::json&)>> breakers{
      [](auto& j) { j["transition"][0] = {0.5, 0.4, 0.0}; },
      [](auto& j) { j["transition"][0] = {0.0, 1.0}; },
      [](auto& j) { j["transition"].erase(2); },
      [](auto& j) { j["transition"][0] = {-0.5, 1.5, 0.0}; },
      [](auto& j) { j["noise"] = 1.5; },
      [](auto& j) { j["start"] = 3; },
      [](auto& j) { j["states"][0]["app"] = ""; },
      [](auto& j) { j["states"][0]["dwell_s"] = 0.0; },
      [](auto& j) { j["states"][0]["emissions"] = nlohmann::json::array(); },
      [](auto& j) { j["states"][0]["emissions"][0]["p"] = 0.9; },
      [](auto& j) { j["states"][0]["emissions"][0]["action"] = "key:ctrl+c"; },
      [](auto& j) { j["states"][1]["emissions"][0]["action"] = "button:0:left"; },
      [](auto& j) {
        j["states"][0]["emissions"] = {{{"action", "key:A"}, {"p", 0.5}}, {{"action", "key:A"}, {"p", 0.5}}};
      },
      [](auto& j) { j["states"] = nlohmann::json::array(); j["transition"] = nlohmann::json::array(); },
  };
  for (std::size_t i = 0; i < breakers.size(); ++i) {
    auto j = base;
    breakers[i](j);
    EXPECT_THROW(WorkflowProfile::from_json(j), DataError) << "breaker " << i;
  }
  auto j = base;
  j["states"][0]["emissions"][0]["action"] = "keyboard:A";
  EXPECT_THROW(WorkflowProfile::from_json(j), Error);
  j = base;
  j.erase("transition");
  EXPECT_THROW(WorkflowProfile::from_json(j), MalformedInput);
  EXPECT_THROW(WorkflowProfile::load(kProfiles / "missing.json"), DataError);
}

TEST(Profile, AlphabetAndButtonHomes) {
  const auto b = WorkflowProfile::load(kProfiles / "benchmark.json");
  const auto alphabet = profile_alphabet(b);
  EXPECT_EQ(alphabet.front(), b.states[0].emissions[0].action);
  EXPECT_EQ(std::set<std::string>(alphabet.begin(), alphabet.end()).size(), alphabet.size());
  const auto homes = button_home_apps(b);
  EXPECT_EQ(homes.size(), 16u);
  EXPECT_EQ(homes.at(11), "mail");
  EXPECT_EQ(homes.at(81), "terminal");
}

TEST(Oracle, SingleStateMatchesClosedForm) {
  // Always predict A: right with probability (1 - noise) * 0.6 + noise / 2.
  const auto p = single_state(0.2);
  const auto est = oracle_accuracy(p, 400000, 3);
  EXPECT_NEAR(est.accuracy, 0.8 * 0.6 + 0.2 * 0.5, 4 * est.standard_error);
  EXPECT_EQ(est.steps, 400000);
}

TEST(Oracle, RevealedStatesMatchClosedForm) {
  // Stationary (2/3, 1/3). After s0 the best guess C is right half the time;
  // after s1 the next state is s0 and A is right with 0.7.
  const auto est = oracle_accuracy(revealed_states(), 400000, 4);
  EXPECT_NEAR(est.accuracy, 2.0 / 3.0 * 0.5 + 1.0 / 3.0 * 0.7, 4 * est.standard_error);
}

TEST(Oracle, DegenerateProfiles) {
  EXPECT_EQ(oracle_accuracy(WorkflowProfile::load(kProfiles / "cycle3.json"), 10000).accuracy, 1.0);
  const auto u = oracle_accuracy(WorkflowProfile::load(kProfiles / "uniform4.json"), 200000);
  EXPECT_NEAR(u.accuracy, 0.25, 4 * u.standard_error);
  EXPECT_THROW(oracle_accuracy(WorkflowProfile::load(kProfiles / "absorbing.json")), DataError);
  EXPECT_THROW(oracle_accuracy(single_state(0.0), 0), ContractViolation);
}

TEST(Oracle, BenchmarkValueIsFrozen) {
  const auto est = oracle_accuracy(WorkflowProfile::load(kProfiles / "benchmark.json"));
  EXPECT_NEAR(est.accuracy, kBenchmarkOracle, 4 * est.standard_error);
  EXPECT_NEAR(est.standard_error, std::sqrt(est.accuracy * (1 - est.accuracy) / 200000.0), 1e-12);
}

TEST(Oracle, DeterministicForASeed) {
  const auto p = WorkflowProfile::load(kProfiles / "benchmark.json");
  EXPECT_EQ(oracle_accuracy(p, 20000, 9).accuracy, oracle_accuracy(p, 20000, 9).accuracy);
}

TEST(Scene, ButtonsAreInsideTheWindowAndDisjoint) {
  const SyntheticScene s = make_scene("mail", {1, 2, 3, 4, 5, 6, 7}, {30, 40}, 800, 600);
  EXPECT_EQ(s.buttons.size(), 7u);
  for (std::size_t i = 0; i < s.buttons.size(); ++i) {
    const Rect& r = s.buttons[i].rect;
    EXPECT_GE(r.x, s.window.x);
    EXPECT_GE(r.y, s.window.y + 16);
    EXPECT_LE(r.x + r.w, s.window.x + s.window.w);
    EXPECT_LE(r.y + r.h, s.window.y + s.window.h);
    for (std::size_t j = i + 1; j < s.buttons.size(); ++j) {
      const Rect& q = s.buttons[j].rect;
      EXPECT_TRUE(r.x + r.w < q.x || q.x + q.w < r.x || r.y + r.h < q.y || q.y + q.h < r.y);
    }
  }
}

TEST(Scene, ButtonSizesStayInRange) {
  for (std::uint32_t id = 1; id < 500; ++id) {
    const auto [w, h] = button_size(id);
    EXPECT_GE(w, 28);
    EXPECT_LE(w, 64);
    EXPECT_GE(h, 18);
    EXPECT_LE(h, 30);
  }
}

TEST(Scene, ButtonLookIsIndependentOfPlacement) {
  const SyntheticScene a = make_scene("x", {5, 9}, {0, 0}, 500, 400);
  const SyntheticScene b = make_scene("x", {9, 5}, {71, 133}, 500, 400);
  const auto ra = render_scene(a), rb = render_scene(b);
  const auto rect_of = [](const SyntheticScene& s, std::uint32_t id) {
    for (const auto& btn : s.buttons)
      if (btn.id == id) return btn.rect;
    return Rect{};
  };
  for (std::uint32_t id : {5u, 9u}) EXPECT_EQ(ra.image.crop(rect_of(a, id)), rb.image.crop(rect_of(b, id)));
  EXPECT_NE(ra.image.crop(rect_of(a, 5)), ra.image.crop(rect_of(a, 9)));
  EXPECT_EQ(ra.detector->boxes().size(), 2u);
  EXPECT_EQ(render_scene(a).image, ra.image);
}

TEST(Generate, DeterministicAndSeedSensitive) {
  const auto p = WorkflowProfile::load(kProfiles / "benchmark.json");
  const auto a = generate_session(p, 300, 5), b = generate_session(p, 300, 5), c = generate_session(p, 300, 6);
  EXPECT_EQ(keys_of(a.truth), keys_of(b.truth));
  EXPECT_EQ(a.states, b.states);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) EXPECT_EQ(a.events[i].timestamp_ms, b.events[i].timestamp_ms);
  EXPECT_NE(keys_of(a.truth), keys_of(c.truth));
  EXPECT_THROW(generate_session(p, 0, 1), ContractViolation);
}

TEST(Generate, TokenizingTheEventsRecoversTheTruth) {
  const auto p = WorkflowProfile::load(kProfiles / "benchmark.json");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GenerateOptions opt;
    opt.start_ms = 5000;
    const auto g = generate_session(p, 800, seed, opt);
    ASSERT_EQ(g.truth.size(), 800u);
    ASSERT_EQ(g.states.size(), 800u);
    EXPECT_EQ(g.events.front().timestamp_ms, 5000);
    for (std::size_t i = 1; i < g.events.size(); ++i) ASSERT_LE(g.events[i - 1].timestamp_ms, g.events[i].timestamp_ms);
    const auto tokens = tokenize_events(g.events, make_scene_resolver(g.scenes));
    EXPECT_EQ(keys_of(tokens), keys_of(g.truth)) << "seed " << seed;
  }
}

TEST(Generate, VisionPipelineAgreesWithGeometry) {
  const auto p = WorkflowProfile::load(kProfiles / "benchmark.json");
  const auto g = generate_session(p, 600, 12);
  MemoryScreenSource source;
  add_rendered_scenes(source, g.scenes);
  PatchDb db;
  const auto vision = tokenize_events(g.events, make_screen_resolver(db, source));
  const auto truth = tokenize_events(g.events, make_scene_resolver(g.scenes));
  ASSERT_EQ(vision.size(), truth.size());
  std::map<std::uint32_t, std::uint32_t> mapping;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto* t = std::get_if<ButtonClick>(&truth[i].kind);
    const auto* v = std::get_if<ButtonClick>(&vision[i].kind);
    ASSERT_EQ(t == nullptr, v == nullptr) << i;
    if (!t) {
      EXPECT_EQ(truth[i], vision[i]);
      continue;
    }
    const auto [it, fresh] = mapping.emplace(t->patch_id.value, v->patch_id.value);
    EXPECT_EQ(it->second, v->patch_id.value) << "button " << t->patch_id.value;
  }
  std::set<std::uint32_t> targets;
  for (const auto& [k, v] : mapping) targets.insert(v);
  EXPECT_EQ(targets.size(), mapping.size());
}

TEST(Generate, EmittedActionsBelongToTheState) {
  auto p = WorkflowProfile::load(kProfiles / "benchmark.json");
  p.noise = 0.0;
  const auto g = generate_session(p, 500, 8);
  for (std::size_t i = 0; i < g.truth.size(); ++i) {
    const auto& em = p.states[static_cast<std::size_t>(g.states[i])].emissions;
    const std::string key = action_key(g.truth[i]);
    EXPECT_TRUE(std::any_of(em.begin(), em.end(), [&](const Emission& e) { return e.action == key; })) << key;
  }
}

TEST(Simulation, WritesLogsScreensAndTruth) {
  test::TempDir dir;
  const auto p = WorkflowProfile::load(kProfiles / "cycle3.json");
  const auto gen = write_simulation(p, 2, 30, 7, dir.path());
  ASSERT_EQ(gen.size(), 2u);
  const auto events = read_event_log(dir / "events.jsonl");
  ASSERT_EQ(events.size(), 2u);
  EXPECT_GT(events[1].front().timestamp_ms, events[0].back().timestamp_ms);
  EXPECT_TRUE(std::filesystem::exists(dir / "screens/s0_editor.ppm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "screens/s1_editor.ppm.boxes.json"));
  std::ifstream truth(dir / "truth.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(truth, line))
    if (!line.empty()) {
      const auto j = nlohmann::json::parse(line);
      EXPECT_TRUE(j.contains("action"));
      EXPECT_TRUE(j.contains("state"));
      ++lines;
    }
  EXPECT_EQ(lines, 60);
  EXPECT_THROW(write_simulation(p, 0, 10, 1, dir.path()), ContractViolation);
}

TEST(MixSeed, SplitMix64Reference) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(mix_seed(0), 0xE220A8397B1DCDAFULL);
  EXPECT_NE(mix_seed(1), mix_seed(2));
}
