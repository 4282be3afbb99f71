#include "acf/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>

#include "acf/errors.hpp"

namespace acf {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int to_int(const std::string& v, const std::string& where) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw MalformedInput(where + ": expected an integer");
  return out;
}

double to_double(const std::string& v, const std::string& where) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw MalformedInput(where + ": expected a number");
  return out;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw MalformedInput(where + ": expected true or false");
}

}  // namespace

ServiceConfig ServiceConfig::parse(std::istream& in) {
  ServiceConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"host", [&](const std::string& v, const std::string&) { c.host = v; }},
      {"port", [&](const std::string& v, const std::string& w) { c.port = to_int(v, w); }},
      {"patch_dir", [&](const std::string& v, const std::string&) { c.patch_dir = v; }},
      {"checkpoint", [&](const std::string& v, const std::string&) { c.checkpoint = v; }},
      {"vocab", [&](const std::string& v, const std::string&) { c.vocab = v; }},
      {"static_dir", [&](const std::string& v, const std::string&) { c.static_dir = v; }},
      {"screen_dpi", [&](const std::string& v, const std::string& w) { c.screen_dpi = to_int(v, w); }},
      {"top_k", [&](const std::string& v, const std::string& w) { c.top_k = to_int(v, w); }},
      {"match_threshold", [&](const std::string& v, const std::string& w) { c.match.threshold = to_double(v, w); }},
      {"match_margin_px", [&](const std::string& v, const std::string& w) { c.match.margin_px = to_int(v, w); }},
      {"prefilter_size_tol_px", [&](const std::string& v, const std::string& w) { c.match.size_tol_px = to_int(v, w); }},
      {"prefilter_color_tol", [&](const std::string& v, const std::string& w) { c.match.color_tol = to_double(v, w); }},
      {"field_gain", [&](const std::string& v, const std::string& w) { c.field.gain = to_double(v, w); }},
      {"field_softening_px", [&](const std::string& v, const std::string& w) { c.field.softening_px = to_double(v, w); }},
      {"field_max_pull_px", [&](const std::string& v, const std::string& w) { c.field.max_pull_px = to_double(v, w); }},
      {"field_dead_zone", [&](const std::string& v, const std::string& w) { c.field.dead_zone = to_bool(v, w); }},
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "config line " + std::to_string(lineno);
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw MalformedInput(where + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const auto it = setters.find(key);
    if (it == setters.end()) throw MalformedInput(where + ": unknown key '" + key + "'");
    it->second(value, where);
  }
  if (c.port < 0 || c.port > 65535) throw MalformedInput("config: port out of range");
  if (c.top_k < 1) throw MalformedInput("config: top_k must be >= 1");
  if (c.screen_dpi < 1) throw MalformedInput("config: screen_dpi must be >= 1");
  try {
    c.field.validate();
  } catch (const ContractViolation& e) {
    throw MalformedInput(std::string("config: ") + e.what());
  }
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  ServiceConfig c = parse(in);
  // Relative paths in the file are relative to the file itself.
  const auto base = path.parent_path();
  for (auto* p : {&c.patch_dir, &c.checkpoint, &c.vocab, &c.static_dir})
    if (!p->empty() && p->is_relative()) *p = base / *p;
  return c;
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return std::filesystem::path(env);
  if (std::filesystem::exists(kDefaultConfigFile)) return std::filesystem::path(kDefaultConfigFile);
  return std::nullopt;
}

}  // namespace acf
