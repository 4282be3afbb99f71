#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "acf/action.hpp"
#include "acf/image.hpp"

namespace acf::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("acf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ImagePatch random_image(int w, int h, std::mt19937_64& rng, int levels = 256) {
  ImagePatch img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>((rng() % static_cast<unsigned>(levels)) * (255 / std::max(1, levels - 1)));
  return img;
}

inline InputEvent key(EventKind kind, const std::string& name, std::int64_t t) {
  InputEvent e;
  e.kind = kind;
  e.key = name;
  e.timestamp_ms = t;
  e.app_id = "app";
  e.window = {0, 0, 100, 100};
  return e;
}

inline InputEvent down(const std::string& name, std::int64_t t) { return key(EventKind::key_down, name, t); }
inline InputEvent up(const std::string& name, std::int64_t t) { return key(EventKind::key_up, name, t); }

inline InputEvent mouse(EventKind kind, int x, int y, std::int64_t t, MouseButton b = MouseButton::left) {
  InputEvent e;
  e.kind = kind;
  e.button = b;
  e.cursor = {x, y};
  e.timestamp_ms = t;
  e.app_id = "app";
  e.window = {0, 0, 100, 100};
  return e;
}

inline InputEvent scroll(int dy, std::int64_t t) {
  InputEvent e;
  e.kind = EventKind::scroll;
  e.scroll_delta = dy;
  e.timestamp_ms = t;
  e.app_id = "app";
  e.window = {0, 0, 100, 100};
  return e;
}

/// Key bars of the keyboard-input figure (one figure unit = 1 s): plain C,
/// H, I; CTRL held across C and V; SPACE; CTRL and ALT held across DEL.
inline std::vector<InputEvent> figure_key_script() {
  return {down("C", 2000),     up("C", 3000),      down("H", 3200),    up("H", 4700),
          down("I", 5000),     up("I", 5600),      down("CTRL", 6000), down("C", 8000),
          up("C", 11500),      down("V", 13000),   up("V", 15000),     up("CTRL", 16000),
          down("SPACE", 17000), up("SPACE", 20000), down("CTRL", 21000), down("ALT", 25000),
          down("DEL", 29000),  up("DEL", 32000),   up("CTRL", 33000),  up("ALT", 34000)};
}

}  // namespace acf::test
