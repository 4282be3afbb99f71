#include "acf/action_log.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"

namespace acf {

namespace {

using nlohmann::json;

template <typename Fn>
auto with_line(std::size_t line_no, Fn&& fn) {
  try {
    return fn();
  } catch (const MalformedInput& e) {
    throw MalformedInput("line " + std::to_string(line_no) + ": " + e.what());
  } catch (const json::exception& e) {
    throw MalformedInput("line " + std::to_string(line_no) + ": " + e.what());
  }
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

const json& required(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null())
    throw MalformedInput(std::string("missing required field '") + field + "'");
  return *it;
}

template <typename Session, typename Parse>
std::vector<Session> read_sessions(std::istream& in, Parse parse) {
  std::vector<Session> sessions(1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      if (!sessions.back().empty()) sessions.emplace_back();
      continue;
    }
    sessions.back().push_back(with_line(line_no, [&] { return parse(json::parse(line)); }));
  }
  if (sessions.back().empty()) sessions.pop_back();
  return sessions;
}

}  // namespace

json event_to_json(const InputEvent& e) {
  json j;
  j["t"] = e.timestamp_ms;
  j["kind"] = std::string(to_string(e.kind));
  if (e.kind == EventKind::key_down || e.kind == EventKind::key_up) j["key"] = e.key;
  if (e.kind == EventKind::mouse_down || e.kind == EventKind::mouse_up)
    j["button"] = std::string(to_string(e.button));
  if (e.kind == EventKind::scroll) j["dy"] = e.scroll_delta;
  j["x"] = e.cursor.x;
  j["y"] = e.cursor.y;
  j["app"] = e.app_id;
  j["win"] = {e.window.x, e.window.y, e.window.w, e.window.h};
  if (e.screenshot_ref) j["shot"] = *e.screenshot_ref;
  return j;
}

InputEvent event_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInput("event must be a JSON object");
  InputEvent e;
  e.timestamp_ms = required(j, "t").get<std::int64_t>();
  const auto kind_text = required(j, "kind").get<std::string>();
  auto kind = parse_event_kind(kind_text);
  if (!kind) throw MalformedInput("unknown event kind '" + kind_text + "'");
  e.kind = *kind;
  switch (e.kind) {
    case EventKind::key_down:
    case EventKind::key_up:
      e.key = required(j, "key").get<std::string>();
      if (e.key.empty()) throw MalformedInput("empty key name");
      break;
    case EventKind::mouse_down:
    case EventKind::mouse_up: {
      const auto text = required(j, "button").get<std::string>();
      auto b = parse_mouse_button(text);
      if (!b) throw MalformedInput("unknown mouse button '" + text + "'");
      e.button = *b;
      break;
    }
    case EventKind::scroll:
      e.scroll_delta = required(j, "dy").get<int>();
      break;
  }
  e.cursor = {required(j, "x").get<int>(), required(j, "y").get<int>()};
  e.app_id = required(j, "app").get<std::string>();
  const auto& win = required(j, "win");
  if (!win.is_array() || win.size() != 4) throw MalformedInput("'win' must be [x,y,w,h]");
  e.window = {win[0].get<int>(), win[1].get<int>(), win[2].get<int>(), win[3].get<int>()};
  if (!e.window.valid()) throw MalformedInput("degenerate window rect");
  if (auto it = j.find("shot"); it != j.end() && !it->is_null()) e.screenshot_ref = it->get<std::string>();
  return e;
}

std::vector<EventSession> read_event_log(std::istream& in) {
  auto sessions = read_sessions<EventSession>(in, event_from_json);
  const InputEvent* prev = nullptr;
  for (const auto& s : sessions) {
    for (const auto& e : s) {
      if (prev && e.timestamp_ms < prev->timestamp_ms)
        throw MalformedInput("timestamps decrease at t=" + std::to_string(e.timestamp_ms));
      prev = &e;
    }
  }
  return sessions;
}

std::vector<EventSession> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return read_event_log(in);
}

void write_event_log(std::ostream& out, const std::vector<EventSession>& sessions) {
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& e : sessions[s]) out << event_to_json(e).dump() << '\n';
  }
}

json record_to_json(const ActionRecord& r) {
  json j;
  j["t"] = r.action.timestamp_ms;
  j["action"] = action_key(r.action);
  j["app"] = r.app_id;
  j["rx"] = r.rel_x;
  j["ry"] = r.rel_y;
  j["dt"] = r.elapsed_bucket;
  if (r.screenshot_ref) j["shot"] = *r.screenshot_ref;
  if (r.synthetic) j["synthetic"] = true;
  return j;
}

ActionRecord record_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInput("action record must be a JSON object");
  ActionRecord r;
  r.action = parse_action_key(required(j, "action").get<std::string>());
  r.action.timestamp_ms = j.value("t", std::int64_t{0});
  r.app_id = j.value("app", std::string{});
  r.rel_x = j.value("rx", 0.0);
  r.rel_y = j.value("ry", 0.0);
  r.elapsed_bucket = j.value("dt", 0);
  if (r.rel_x < 0 || r.rel_x > 1 || r.rel_y < 0 || r.rel_y > 1)
    throw MalformedInput("relative cursor position outside [0,1]");
  if (r.elapsed_bucket < 0 || r.elapsed_bucket > kMaxElapsedBucket)
    throw MalformedInput("elapsed bucket outside 0..3");
  if (auto it = j.find("shot"); it != j.end() && !it->is_null()) r.screenshot_ref = it->get<std::string>();
  r.synthetic = j.value("synthetic", false);
  return r;
}

std::vector<ActionSession> read_action_log(std::istream& in) {
  return read_sessions<ActionSession>(in, record_from_json);
}

std::vector<ActionSession> read_action_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return read_action_log(in);
}

void write_action_log(std::ostream& out, const std::vector<ActionSession>& sessions) {
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& r : sessions[s]) out << record_to_json(r).dump() << '\n';
  }
}

void write_action_log(const std::filesystem::path& path, const std::vector<ActionSession>& sessions) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_action_log(out, sessions);
}

}  // namespace acf
