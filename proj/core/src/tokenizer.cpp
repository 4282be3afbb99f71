#include "acf/tokenizer.hpp"

#include <array>
#include <set>
#include <string>

#include "acf/errors.hpp"

namespace acf {

namespace {

constexpr std::array<Modifier, 4> kAllModifiers{kCtrl, kShift, kAlt, kMeta};

/// Held modifiers, tracked per physical key so that releasing LCTRL while
/// RCTRL is still down keeps CTRL active.
class ModifierState {
 public:
  void press(const std::string& key, Modifier bit) { held_[index(bit)].insert(key); }

  bool release(const std::string& key, Modifier bit) { return held_[index(bit)].erase(key) > 0; }

  std::uint8_t mask() const {
    std::uint8_t m = 0;
    for (std::size_t i = 0; i < kAllModifiers.size(); ++i) {
      if (!held_[i].empty()) m |= kAllModifiers[i];
    }
    return m;
  }

 private:
  static std::size_t index(Modifier bit) {
    for (std::size_t i = 0; i < kAllModifiers.size(); ++i) {
      if (kAllModifiers[i] == bit) return i;
    }
    return 0;
  }

  std::array<std::set<std::string>, 4> held_;
};

}  // namespace

std::vector<SourcedAction> tokenize_events_sourced(std::span<const InputEvent> events,
                                                   const PatchResolver& resolver,
                                                   TokenizeStats* stats) {
  TokenizeStats local;
  TokenizeStats& st = stats ? *stats : local;

  std::vector<SourcedAction> out;
  ModifierState modifiers;
  std::set<std::string> pressed;

  // Open scroll run: direction and timestamp of its last event.
  std::optional<ScrollDirection> scroll_dir;
  std::int64_t scroll_last_ms = 0;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const InputEvent& ev = events[i];
    if (i > 0 && ev.timestamp_ms < events[i - 1].timestamp_ms) {
      throw MalformedInput("event " + std::to_string(i) + ": timestamp " +
                           std::to_string(ev.timestamp_ms) + " precedes " +
                           std::to_string(events[i - 1].timestamp_ms));
    }

    switch (ev.kind) {
      case EventKind::key_down: {
        const std::string key = canonical_key_name(ev.key);
        if (auto mod = modifier_of(key)) {
          modifiers.press(key, *mod);
        } else {
          pressed.insert(key);
          out.push_back({make_keystroke(key, modifiers.mask(), ev.timestamp_ms), i});
          scroll_dir.reset();
        }
        break;
      }
      case EventKind::key_up: {
        const std::string key = canonical_key_name(ev.key);
        const bool matched = modifier_of(key) ? modifiers.release(key, *modifier_of(key))
                                              : pressed.erase(key) > 0;
        if (!matched) ++st.ignored_key_ups;
        break;
      }
      case EventKind::mouse_down: {
        std::optional<PatchId> patch = resolver ? resolver(ev) : std::nullopt;
        if (patch) {
          out.push_back({make_button_click(*patch, ev.button, ev.timestamp_ms), i});
        } else {
          out.push_back({make_generic_click(ev.button, ev.timestamp_ms), i});
        }
        scroll_dir.reset();
        break;
      }
      case EventKind::mouse_up:
        break;
      case EventKind::scroll: {
        if (ev.scroll_delta == 0) break;
        const auto dir = ev.scroll_delta > 0 ? ScrollDirection::up : ScrollDirection::down;
        if (scroll_dir == dir && ev.timestamp_ms - scroll_last_ms <= kScrollCoalesceMs) {
          ++st.coalesced_scrolls;
        } else {
          out.push_back({make_scroll(dir, ev.timestamp_ms), i});
          scroll_dir = dir;
        }
        scroll_last_ms = ev.timestamp_ms;
        break;
      }
    }
  }
  return out;
}

std::vector<UserAction> tokenize_events(std::span<const InputEvent> events,
                                        const PatchResolver& resolver, TokenizeStats* stats) {
  std::vector<UserAction> out;
  for (auto& s : tokenize_events_sourced(events, resolver, stats)) out.push_back(std::move(s.action));
  return out;
}

std::vector<ActionRecord> tokenize_to_records(std::span<const InputEvent> events,
                                              const PatchResolver& resolver,
                                              TokenizeStats* stats) {
  std::vector<ActionRecord> out;
  std::optional<std::int64_t> prev;
  for (const auto& s : tokenize_events_sourced(events, resolver, stats)) {
    out.push_back(make_record(s.action, prev, events[s.event_index]));
    prev = s.action.timestamp_ms;
  }
  return out;
}

PatchResolver no_patch_resolver() {
  return [](const InputEvent&) { return std::optional<PatchId>{}; };
}

}  // namespace acf
