#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "acf/attraction.hpp"
#include "acf/patch_db.hpp"

namespace acf {

/// Flat key = value settings:
///   # comment
///   port = 8080
///   patch_dir = "patches"
///   field_dead_zone = true
/// Strings may be quoted. Unknown keys are rejected.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path patch_dir = "patches";
  std::filesystem::path checkpoint;
  std::filesystem::path vocab;
  std::filesystem::path static_dir;  // UI assets, optional
  int screen_dpi = 96;
  int top_k = 5;
  MatchConfig match;
  FieldConfig field;

  static ServiceConfig parse(std::istream& in);
  static ServiceConfig load(const std::filesystem::path& path);
};

inline constexpr const char* kConfigEnvVar = "ACF_CONFIG";
inline constexpr const char* kDefaultConfigFile = "acf.conf";

/// The config file to read: an explicit path wins, then $ACF_CONFIG, then
/// ./acf.conf if it exists. nullopt means built-in defaults.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace acf
