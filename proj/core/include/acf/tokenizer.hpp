#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "acf/action.hpp"

namespace acf {

/// Maps a mouse_down event to the interactive area it landed on, if any.
using PatchResolver = std::function<std::optional<PatchId>(const InputEvent&)>;

/// Consecutive same-direction scroll events closer than this coalesce.
inline constexpr std::int64_t kScrollCoalesceMs = 200;

struct SourcedAction {
  UserAction action;
  std::size_t event_index = 0;  // index of the event that produced the action
};

struct TokenizeStats {
  std::size_t ignored_key_ups = 0;
  std::size_t coalesced_scrolls = 0;
};

/// Converts a timestamp-ordered event stream into user actions.
///
/// Modifier keys never produce actions on their own; every non-modifier
/// key_down (auto-repeats included) yields one Keystroke carrying the set of
/// modifiers held at that instant. mouse_down yields ButtonClick when the
/// resolver identifies a patch and GenericClick otherwise. Throws
/// MalformedInput when timestamps decrease.
std::vector<SourcedAction> tokenize_events_sourced(std::span<const InputEvent> events,
                                                   const PatchResolver& resolver,
                                                   TokenizeStats* stats = nullptr);

std::vector<UserAction> tokenize_events(std::span<const InputEvent> events,
                                        const PatchResolver& resolver,
                                        TokenizeStats* stats = nullptr);

/// Tokenizes and attaches per-action context (app, relative cursor, elapsed bucket).
std::vector<ActionRecord> tokenize_to_records(std::span<const InputEvent> events,
                                              const PatchResolver& resolver,
                                              TokenizeStats* stats = nullptr);

/// Resolver that never identifies a patch (every click is generic).
PatchResolver no_patch_resolver();

}  // namespace acf
