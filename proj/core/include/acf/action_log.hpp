#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acf/action.hpp"

namespace acf {

/// A log is a list of sessions; sessions are separated by blank lines on disk
/// and sliding windows never cross a session boundary.
using EventSession = std::vector<InputEvent>;
using ActionSession = std::vector<ActionRecord>;

/// Event log, one JSON object per line:
///   {"t":int,"kind":str,"key":str?,"button":str?,"dy":int?,"x":int,"y":int,
///    "app":str,"win":[x,y,w,h],"shot":str?}
/// Unknown fields are ignored. Missing required fields, degenerate windows
/// and decreasing timestamps raise MalformedInput naming the line.
std::vector<EventSession> read_event_log(std::istream& in);
std::vector<EventSession> read_event_log(const std::filesystem::path& path);
void write_event_log(std::ostream& out, const std::vector<EventSession>& sessions);

nlohmann::json event_to_json(const InputEvent& event);
InputEvent event_from_json(const nlohmann::json& j);

/// Action log (ingest output), one record per line:
///   {"t":int,"action":key,"app":str,"rx":num,"ry":num,"dt":bucket,"shot":str?}
std::vector<ActionSession> read_action_log(std::istream& in);
std::vector<ActionSession> read_action_log(const std::filesystem::path& path);
void write_action_log(std::ostream& out, const std::vector<ActionSession>& sessions);
void write_action_log(const std::filesystem::path& path, const std::vector<ActionSession>& sessions);

nlohmann::json record_to_json(const ActionRecord& record);
ActionRecord record_from_json(const nlohmann::json& j);

}  // namespace acf
