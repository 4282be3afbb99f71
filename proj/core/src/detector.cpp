#include "acf/detector.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"

namespace acf {

namespace {

std::string_view kind_name(WidgetKind k) {
  switch (k) {
    case WidgetKind::button: return "button";
    case WidgetKind::link: return "link";
    case WidgetKind::text_field: return "text_field";
  }
  return "button";
}

WidgetKind parse_kind(const std::string& s) {
  if (s == "button") return WidgetKind::button;
  if (s == "link") return WidgetKind::link;
  if (s == "text_field") return WidgetKind::text_field;
  throw MalformedInput("unknown widget kind '" + s + "'");
}

}  // namespace

std::optional<DetectorBox> select_clicked_region(std::span<const DetectorBox> boxes, Point cursor) {
  const DetectorBox* best = nullptr;
  for (const auto& b : boxes) {
    if (!b.rect.valid() || !b.rect.contains(cursor)) continue;
    if (!best || b.rect.area() < best->rect.area()) best = &b;
  }
  if (!best) return std::nullopt;
  return *best;
}

std::filesystem::path boxes_sidecar_path(const std::filesystem::path& screenshot) {
  return std::filesystem::path(screenshot.string() + ".boxes.json");
}

void write_boxes(const std::filesystem::path& path, std::span<const DetectorBox> boxes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : boxes) {
    arr.push_back({{"x", b.rect.x},
                   {"y", b.rect.y},
                   {"w", b.rect.w},
                   {"h", b.rect.h},
                   {"kind", std::string(kind_name(b.kind))}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << nlohmann::json{{"boxes", arr}}.dump() << '\n';
}

std::vector<DetectorBox> read_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<DetectorBox> boxes;
  try {
    nlohmann::json j;
    in >> j;
    for (const auto& b : j.at("boxes")) {
      DetectorBox box;
      box.rect = {b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(), b.at("h").get<int>()};
      if (!box.rect.valid()) throw MalformedInput("degenerate detector box");
      box.kind = parse_kind(b.value("kind", std::string("button")));
      boxes.push_back(box);
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
  return boxes;
}

}  // namespace acf
