#include <gtest/gtest.h>

#include <random>

#include "acf/errors.hpp"
#include "acf/tokenizer.hpp"
#include "support.hpp"

using namespace acf;
using test::down;
using test::up;

namespace {

std::vector<std::string> labels(const std::vector<InputEvent>& events, TokenizeStats* stats = nullptr,
                                const PatchResolver& r = no_patch_resolver()) {
  std::vector<std::string> out;
  for (const auto& a : tokenize_events(events, r, stats)) out.push_back(action_label(a));
  return out;
}

using Labels = std::vector<std::string>;

}  // namespace

TEST(Tokenizer, KeyFigureScript) {
  EXPECT_EQ(labels(test::figure_key_script()), (Labels{"C", "H", "I", "CTRL+C", "CTRL+V", "SPACE", "CTRL+ALT+DEL"}));
}

TEST(Tokenizer, EmptyStream) { EXPECT_TRUE(labels({}).empty()); }

TEST(Tokenizer, ModifiersAloneProduceNothing) {
  EXPECT_TRUE(labels({down("CTRL", 0), down("SHIFT", 5), up("SHIFT", 9), up("CTRL", 10)}).empty());
}

TEST(Tokenizer, ModifierSetIsTakenAtKeyDown) {
  // CTRL released before C is released: still CTRL+C. ALT pressed while C is held: no effect.
  EXPECT_EQ(labels({down("CTRL", 0), down("C", 10), up("CTRL", 20), down("ALT", 25), up("C", 30), up("ALT", 40)}),
            (Labels{"CTRL+C"}));
}

TEST(Tokenizer, AutoRepeatYieldsOneKeystrokePerKeyDown) {
  EXPECT_EQ(labels({down("A", 0), down("A", 500), down("A", 530), up("A", 600)}), (Labels{"A", "A", "A"}));
}

TEST(Tokenizer, LeftAndRightModifiersFoldTogether) {
  EXPECT_EQ(labels({down("LCTRL", 0), down("RCTRL", 1), up("LCTRL", 2), down("X", 3), up("RCTRL", 4), down("Y", 5)}),
            (Labels{"CTRL+X", "Y"}));
}

TEST(Tokenizer, KeyAliasesAreCanonical) {
  EXPECT_EQ(labels({down("ctrl", 0), down("alt", 1), down("Delete", 2)}), (Labels{"CTRL+ALT+DEL"}));
}

TEST(Tokenizer, UnmatchedKeyUpsAreCountedAndIgnored) {
  TokenizeStats stats;
  EXPECT_EQ(labels({up("A", 0), up("CTRL", 1), down("B", 2), up("B", 3), up("B", 4)}, &stats), (Labels{"B"}));
  EXPECT_EQ(stats.ignored_key_ups, 3u);
}

TEST(Tokenizer, DecreasingTimestampsAreMalformed) {
  EXPECT_THROW(labels({down("A", 10), down("B", 9)}), MalformedInput);
}

TEST(Tokenizer, EqualTimestampsAreAllowed) { EXPECT_EQ(labels({down("A", 5), down("B", 5)}), (Labels{"A", "B"})); }

TEST(Tokenizer, ClicksUseTheResolver) {
  const PatchResolver r = [](const InputEvent& e) -> std::optional<PatchId> {
    if (e.cursor.x < 50) return PatchId{4};
    return std::nullopt;
  };
  const std::vector<InputEvent> ev{test::mouse(EventKind::mouse_down, 10, 10, 0),
                                   test::mouse(EventKind::mouse_up, 10, 10, 80),
                                   test::mouse(EventKind::mouse_down, 90, 10, 200, MouseButton::right),
                                   test::mouse(EventKind::mouse_up, 90, 10, 260, MouseButton::right)};
  EXPECT_EQ(labels(ev, nullptr, r), (Labels{"BUTTON #4", "CLICK (right)"}));
  EXPECT_EQ(labels(ev, nullptr, nullptr), (Labels{"CLICK (left)", "CLICK (right)"}));
}

TEST(Tokenizer, ModifiersDoNotAttachToClicks) {
  EXPECT_EQ(labels({down("CTRL", 0), test::mouse(EventKind::mouse_down, 1, 1, 10)}), (Labels{"CLICK (left)"}));
}

TEST(Tokenizer, ScrollRunsCoalesce) {
  TokenizeStats stats;
  const auto out = labels({test::scroll(-1, 0), test::scroll(-1, 150), test::scroll(-2, 350),  // one run
                           test::scroll(-1, 551),                                               // gap > 200
                           test::scroll(1, 600),                                                // reversal
                           test::scroll(0, 610)},
                          &stats);
  EXPECT_EQ(out, (Labels{"SCROLL down", "SCROLL down", "SCROLL up"}));
  EXPECT_EQ(stats.coalesced_scrolls, 2u);
}

TEST(Tokenizer, OtherActionsBreakAScrollRun) {
  EXPECT_EQ(labels({test::scroll(1, 0), down("A", 50), test::scroll(1, 100)}), (Labels{"SCROLL up", "A", "SCROLL up"}));
}

TEST(Tokenizer, SourcedActionsPointAtTheirEvents) {
  const auto s = tokenize_events_sourced(test::figure_key_script(), no_patch_resolver());
  ASSERT_EQ(s.size(), 7u);
  EXPECT_EQ(s[0].event_index, 0u);
  EXPECT_EQ(s[3].event_index, 7u);
  EXPECT_EQ(s[3].action.timestamp_ms, 8000);
}

TEST(Tokenizer, RecordsCarryElapsedBuckets) {
  const auto r = tokenize_to_records(std::vector<InputEvent>{down("A", 0), down("B", 15000), down("C", 16000)},
                                     no_patch_resolver());
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].elapsed_bucket, 0);
  EXPECT_EQ(r[1].elapsed_bucket, 1);
  EXPECT_EQ(r[2].elapsed_bucket, 0);
  EXPECT_EQ(r[1].app_id, "app");
}

// Property: the number of keystrokes equals the number of non-modifier
// key_downs, and each carries exactly the modifiers held at that moment.
TEST(Tokenizer, RandomStreamsMatchAReferenceModel) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> keys{"A", "B", "C", "CTRL", "LSHIFT", "RSHIFT", "ALT", "META"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<InputEvent> ev;
    std::map<std::string, bool> held;
    std::vector<std::string> expected;
    for (int i = 0; i < 40; ++i) {
      const std::string& k = keys[rng() % keys.size()];
      const bool press = rng() % 2;
      ev.push_back(press ? down(k, i) : up(k, i));
      if (modifier_of(k)) {
        held[k] = press;
      } else if (press) {
        std::uint8_t m = 0;
        for (const auto& [name, on] : held)
          if (on) m |= *modifier_of(name);
        expected.push_back(action_key(make_keystroke(k, m)));
      }
    }
    std::vector<std::string> got;
    for (const auto& a : tokenize_events(ev, no_patch_resolver())) got.push_back(action_key(a));
    ASSERT_EQ(got, expected) << "trial " << trial;
  }
}
