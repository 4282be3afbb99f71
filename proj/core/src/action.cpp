#include "acf/action.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "acf/errors.hpp"

namespace acf {

namespace {

struct ModifierName {
  Modifier bit;
  std::string_view label;
};

// Canonical order used in labels and keys.
constexpr std::array<ModifierName, 4> kModifierOrder{{
    {kCtrl, "CTRL"},
    {kShift, "SHIFT"},
    {kAlt, "ALT"},
    {kMeta, "META"},
}};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::optional<Modifier> base_modifier(std::string_view name) {
  if (name == "CTRL" || name == "CONTROL") return kCtrl;
  if (name == "SHIFT") return kShift;
  if (name == "ALT" || name == "MENU" || name == "ALTGR" || name == "OPTION") return kAlt;
  if (name == "META" || name == "WIN" || name == "SUPER" || name == "CMD" ||
      name == "COMMAND" || name == "OS")
    return kMeta;
  return std::nullopt;
}

std::string modifier_prefix(std::uint8_t mods) {
  std::string out;
  for (const auto& m : kModifierOrder) {
    if (mods & m.bit) {
      out += m.label;
      out += '+';
    }
  }
  return out;
}

std::uint32_t parse_u32(std::string_view text, std::string_view context) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw MalformedInput("bad number in action key '" + std::string(context) + "'");
  return value;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::key_down: return "key_down";
    case EventKind::key_up: return "key_up";
    case EventKind::mouse_down: return "mouse_down";
    case EventKind::mouse_up: return "mouse_up";
    case EventKind::scroll: return "scroll";
  }
  return "?";
}

std::string_view to_string(MouseButton button) {
  switch (button) {
    case MouseButton::left: return "left";
    case MouseButton::right: return "right";
    case MouseButton::middle: return "middle";
  }
  return "?";
}

std::string_view to_string(ScrollDirection direction) {
  return direction == ScrollDirection::up ? "up" : "down";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::key_down, EventKind::key_up, EventKind::mouse_down,
                 EventKind::mouse_up, EventKind::scroll}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<MouseButton> parse_mouse_button(std::string_view text) {
  for (auto b : {MouseButton::left, MouseButton::right, MouseButton::middle}) {
    if (to_string(b) == text) return b;
  }
  return std::nullopt;
}

std::string canonical_key_name(std::string_view key) {
  std::string k = upper(key);
  if (k == "DELETE") return "DEL";
  if (k == "ESCAPE") return "ESC";
  if (k == "RETURN") return "ENTER";
  if (k == " " || k == "SPACEBAR") return "SPACE";
  return k;
}

std::optional<Modifier> modifier_of(std::string_view key) {
  const std::string k = upper(key);
  if (auto m = base_modifier(k)) return m;
  std::string_view v = k;
  for (std::string_view p : {"LEFT_", "RIGHT_", "LEFT", "RIGHT", "L", "R"}) {
    if (starts_with(v, p)) {
      if (auto m = base_modifier(v.substr(p.size()))) return m;
    }
  }
  for (std::string_view s : {"_L", "_R"}) {
    if (ends_with(v, s)) {
      if (auto m = base_modifier(v.substr(0, v.size() - s.size()))) return m;
    }
  }
  return std::nullopt;
}

UserAction make_keystroke(std::string_view key, std::uint8_t modifiers, std::int64_t t) {
  return {Keystroke{canonical_key_name(key), modifiers}, t};
}

UserAction make_button_click(PatchId id, MouseButton button, std::int64_t t) {
  return {ButtonClick{id, button}, t};
}

UserAction make_generic_click(MouseButton button, std::int64_t t) {
  return {GenericClick{button}, t};
}

UserAction make_scroll(ScrollDirection direction, std::int64_t t) { return {Scroll{direction}, t}; }

std::string action_key(const UserAction& action) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Keystroke>) {
          return "key:" + modifier_prefix(a.modifiers) + a.key;
        } else if constexpr (std::is_same_v<T, ButtonClick>) {
          return "button:" + std::to_string(a.patch_id.value) + ":" +
                 std::string(to_string(a.button));
        } else if constexpr (std::is_same_v<T, GenericClick>) {
          return "click:" + std::string(to_string(a.button));
        } else {
          return "scroll:" + std::string(to_string(a.direction));
        }
      },
      action.kind);
}

std::string action_label(const UserAction& action) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Keystroke>) {
          return modifier_prefix(a.modifiers) + a.key;
        } else if constexpr (std::is_same_v<T, ButtonClick>) {
          std::string s = "BUTTON #" + std::to_string(a.patch_id.value);
          if (a.button != MouseButton::left) s += " (" + std::string(to_string(a.button)) + ")";
          return s;
        } else if constexpr (std::is_same_v<T, GenericClick>) {
          return "CLICK (" + std::string(to_string(a.button)) + ")";
        } else {
          return "SCROLL " + std::string(to_string(a.direction));
        }
      },
      action.kind);
}

UserAction parse_action_key(std::string_view key) {
  const auto colon = key.find(':');
  if (colon == std::string_view::npos)
    throw MalformedInput("action key without type prefix: '" + std::string(key) + "'");
  const std::string_view type = key.substr(0, colon);
  std::string_view rest = key.substr(colon + 1);

  if (type == "key") {
    std::uint8_t mods = 0;
    bool stripped = true;
    while (stripped) {
      stripped = false;
      for (const auto& m : kModifierOrder) {
        const std::string prefix = std::string(m.label) + "+";
        if (rest.size() > prefix.size() && starts_with(rest, prefix)) {
          mods |= m.bit;
          rest.remove_prefix(prefix.size());
          stripped = true;
        }
      }
    }
    if (rest.empty() || modifier_of(rest))
      throw MalformedInput("keystroke key must be a non-modifier: '" + std::string(key) + "'");
    return make_keystroke(rest, mods);
  }
  if (type == "button") {
    const auto sep = rest.find(':');
    const std::string_view id_text = rest.substr(0, sep);
    MouseButton button = MouseButton::left;
    if (sep != std::string_view::npos) {
      auto b = parse_mouse_button(rest.substr(sep + 1));
      if (!b) throw MalformedInput("bad mouse button in '" + std::string(key) + "'");
      button = *b;
    }
    return make_button_click(PatchId{parse_u32(id_text, key)}, button);
  }
  if (type == "click") {
    auto b = parse_mouse_button(rest);
    if (!b) throw MalformedInput("bad mouse button in '" + std::string(key) + "'");
    return make_generic_click(*b);
  }
  if (type == "scroll") {
    if (rest == "up") return make_scroll(ScrollDirection::up);
    if (rest == "down") return make_scroll(ScrollDirection::down);
    throw MalformedInput("bad scroll direction in '" + std::string(key) + "'");
  }
  throw MalformedInput("unknown action type in '" + std::string(key) + "'");
}

int elapsed_bucket(std::optional<std::int64_t> prev_timestamp_ms, std::int64_t timestamp_ms) {
  if (!prev_timestamp_ms || timestamp_ms <= *prev_timestamp_ms) return 0;
  const std::int64_t dt_ms = timestamp_ms - *prev_timestamp_ms;
  const std::int64_t bucket = dt_ms / (1000LL * kElapsedBucketSeconds);
  return static_cast<int>(std::min<std::int64_t>(bucket, kMaxElapsedBucket));
}

ActionRecord make_record(const UserAction& action, std::optional<std::int64_t> prev_timestamp_ms,
                         const InputEvent& event) {
  ActionRecord r;
  r.action = action;
  r.app_id = event.app_id;
  const Rect& win = event.window;
  if (win.w > 0 && win.h > 0) {
    r.rel_x = std::clamp(static_cast<double>(event.cursor.x - win.x) / win.w, 0.0, 1.0);
    r.rel_y = std::clamp(static_cast<double>(event.cursor.y - win.y) / win.h, 0.0, 1.0);
  }
  r.elapsed_bucket = elapsed_bucket(prev_timestamp_ms, action.timestamp_ms);
  r.screenshot_ref = event.screenshot_ref;
  return r;
}

ContextFeatures context_features(const ActionRecord& record,
                                 const std::map<std::string, int>& app_vocab) {
  ContextFeatures f;
  f.app_onehot.assign(app_vocab.size(), 0.0);
  if (auto it = app_vocab.find(record.app_id); it != app_vocab.end()) {
    f.app_onehot.at(static_cast<std::size_t>(it->second)) = 1.0;
  }
  f.rel_x = record.rel_x;
  f.rel_y = record.rel_y;
  f.elapsed_bucket = std::clamp(record.elapsed_bucket, 0, kMaxElapsedBucket);
  return f;
}

ContextFeatures encode_context(const UserAction& action,
                               std::optional<std::int64_t> prev_timestamp_ms,
                               const InputEvent& event,
                               const std::map<std::string, int>& app_vocab) {
  return context_features(make_record(action, prev_timestamp_ms, event), app_vocab);
}

}  // namespace acf
