#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "acf/geometry.hpp"
#include "acf/image.hpp"

namespace acf {

enum class WidgetKind { button, link, text_field };

/// One interactive area found on a screenshot.
struct DetectorBox {
  Rect rect;
  WidgetKind kind = WidgetKind::button;
  friend bool operator==(const DetectorBox&, const DetectorBox&) = default;
};

/// Finds interactive areas on a screenshot. The learned detector used in
/// production plugs in behind this interface.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<DetectorBox> detect(const ImagePatch& screenshot) const = 0;
};

/// Detector backed by a fixed box list (ground truth from a rendered scene).
class FixedDetector final : public Detector {
 public:
  explicit FixedDetector(std::vector<DetectorBox> boxes) : boxes_(std::move(boxes)) {}
  std::vector<DetectorBox> detect(const ImagePatch&) const override { return boxes_; }
  const std::vector<DetectorBox>& boxes() const { return boxes_; }

 private:
  std::vector<DetectorBox> boxes_;
};

/// Among the boxes containing `cursor` (edges inclusive), the one with the
/// smallest area; ties go to the earliest box. nullopt when none contains it.
std::optional<DetectorBox> select_clicked_region(std::span<const DetectorBox> boxes, Point cursor);

/// Box annotations stored next to a screenshot as "<shot>.boxes.json":
///   {"boxes":[{"x":..,"y":..,"w":..,"h":..,"kind":"button"}]}
std::filesystem::path boxes_sidecar_path(const std::filesystem::path& screenshot);
void write_boxes(const std::filesystem::path& path, std::span<const DetectorBox> boxes);
std::vector<DetectorBox> read_boxes(const std::filesystem::path& path);

}  // namespace acf
