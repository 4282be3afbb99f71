#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "acf/geometry.hpp"

namespace acf {

enum class EventKind { key_down, key_up, mouse_down, mouse_up, scroll };
enum class MouseButton { left, right, middle };
enum class ScrollDirection { up, down };

std::string_view to_string(EventKind kind);
std::string_view to_string(MouseButton button);
std::string_view to_string(ScrollDirection direction);
std::optional<EventKind> parse_event_kind(std::string_view text);
std::optional<MouseButton> parse_mouse_button(std::string_view text);

/// Identity of a stored interactive-area patch.
struct PatchId {
  std::uint32_t value = 0;
  friend auto operator<=>(const PatchId&, const PatchId&) = default;
};

/// A raw, timestamped device event as recorded by an input logger.
struct InputEvent {
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::key_down;
  std::string key;  // symbolic key name, key events only
  MouseButton button = MouseButton::left;
  int scroll_delta = 0;  // positive scrolls up
  Point cursor;
  std::string app_id;
  Rect window;
  std::optional<std::string> screenshot_ref;
};

/// Modifier bits. Left/right variants of a physical modifier map to the same bit.
enum Modifier : std::uint8_t {
  kCtrl = 1U << 0U,
  kShift = 1U << 1U,
  kAlt = 1U << 2U,
  kMeta = 1U << 3U,
};

/// Upper-cases a key name and folds common aliases (e.g. "DELETE" -> "DEL").
std::string canonical_key_name(std::string_view key);

/// The modifier bit a key name stands for, or nullopt for ordinary keys.
std::optional<Modifier> modifier_of(std::string_view key);

struct Keystroke {
  std::string key;
  std::uint8_t modifiers = 0;
  friend bool operator==(const Keystroke&, const Keystroke&) = default;
};

struct ButtonClick {
  PatchId patch_id;
  MouseButton button = MouseButton::left;
  friend bool operator==(const ButtonClick&, const ButtonClick&) = default;
};

struct GenericClick {
  MouseButton button = MouseButton::left;
  friend bool operator==(const GenericClick&, const GenericClick&) = default;
};

struct Scroll {
  ScrollDirection direction = ScrollDirection::down;
  friend bool operator==(const Scroll&, const Scroll&) = default;
};

/// The discrete unit the forecaster predicts. Equality compares the action
/// identity only; the timestamp is an attribute of the occurrence.
struct UserAction {
  std::variant<Keystroke, ButtonClick, GenericClick, Scroll> kind;
  std::int64_t timestamp_ms = 0;

  bool is_keystroke() const { return std::holds_alternative<Keystroke>(kind); }
  bool is_button_click() const { return std::holds_alternative<ButtonClick>(kind); }

  friend bool operator==(const UserAction& a, const UserAction& b) { return a.kind == b.kind; }
};

UserAction make_keystroke(std::string_view key, std::uint8_t modifiers = 0, std::int64_t t = 0);
UserAction make_button_click(PatchId id, MouseButton button = MouseButton::left, std::int64_t t = 0);
UserAction make_generic_click(MouseButton button = MouseButton::left, std::int64_t t = 0);
UserAction make_scroll(ScrollDirection direction, std::int64_t t = 0);

/// Canonical, parseable identity string:
///   key:CTRL+ALT+DEL   button:7:left   click:right   scroll:up
std::string action_key(const UserAction& action);

/// Human readable label ("CTRL+C", "BUTTON #7", "CLICK (right)", "SCROLL up").
std::string action_label(const UserAction& action);

/// Inverse of action_key. Throws MalformedInput on unknown syntax.
UserAction parse_action_key(std::string_view key);

/// The per-action system state that accompanies a UserAction, before the
/// application id has been mapped through an app vocabulary.
struct ActionRecord {
  UserAction action;
  std::string app_id;
  double rel_x = 0.0;
  double rel_y = 0.0;
  int elapsed_bucket = 0;
  std::optional<std::string> screenshot_ref;
  bool synthetic = false;  // what-if insertion, not taken by the user
};

struct ContextFeatures {
  std::vector<double> app_onehot;
  double rel_x = 0.0;
  double rel_y = 0.0;
  int elapsed_bucket = 0;
};

inline constexpr int kElapsedBucketSeconds = 10;
inline constexpr int kMaxElapsedBucket = 3;

/// min(floor(dt / 10 s), 3); zero for the first action of a session and for
/// negative gaps.
int elapsed_bucket(std::optional<std::int64_t> prev_timestamp_ms, std::int64_t timestamp_ms);

/// Builds the context record for `action`, produced by `event`.
ActionRecord make_record(const UserAction& action, std::optional<std::int64_t> prev_timestamp_ms,
                         const InputEvent& event);

/// Maps a record's raw context through the app vocabulary. Unknown apps
/// get an all-zero one-hot block.
ContextFeatures context_features(const ActionRecord& record,
                                 const std::map<std::string, int>& app_vocab);

ContextFeatures encode_context(const UserAction& action,
                               std::optional<std::int64_t> prev_timestamp_ms,
                               const InputEvent& event,
                               const std::map<std::string, int>& app_vocab);

}  // namespace acf

template <>
struct std::hash<acf::PatchId> {
  std::size_t operator()(const acf::PatchId& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
