#include "acf/click_resolver.hpp"

namespace acf {

FileScreenSource::FileScreenSource(std::filesystem::path base_dir, int screen_dpi,
                                   std::shared_ptr<const Detector> fallback)
    : base_(std::move(base_dir)), dpi_(screen_dpi), fallback_(std::move(fallback)) {}

std::optional<Capture> FileScreenSource::capture(const std::string& ref) {
  std::lock_guard lock(mu_);
  if (auto it = cache_.find(ref); it != cache_.end()) return it->second;
  const auto path = base_ / ref;
  if (!std::filesystem::exists(path)) return std::nullopt;
  auto image = std::make_shared<ImagePatch>(read_ppm(path));
  image->dpi = dpi_;
  Capture c;
  c.image = std::move(image);
  const auto sidecar = boxes_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    c.detector = std::make_shared<FixedDetector>(read_boxes(sidecar));
  } else {
    c.detector = fallback_;
  }
  cache_.emplace(ref, c);
  return c;
}

std::optional<Capture> MemoryScreenSource::capture(const std::string& ref) {
  auto it = captures_.find(ref);
  if (it == captures_.end()) return std::nullopt;
  return it->second;
}

std::optional<ImagePatch> extract_clicked_patch(const InputEvent& event, ScreenSource& source) {
  if (!event.screenshot_ref) return std::nullopt;
  auto capture = source.capture(*event.screenshot_ref);
  if (!capture || !capture->image || !capture->detector) return std::nullopt;
  const auto boxes = capture->detector->detect(*capture->image);
  auto box = select_clicked_region(boxes, event.cursor);
  if (!box) return std::nullopt;
  ImagePatch patch = capture->image->crop(box->rect);
  if (patch.empty()) return std::nullopt;
  return normalize_dpi(patch, capture->image->dpi);
}

PatchResolver make_screen_resolver(PatchDb& db, ScreenSource& source, ClickStats* stats) {
  return [&db, &source, stats](const InputEvent& event) -> std::optional<PatchId> {
    if (stats) ++stats->clicks;
    auto patch = extract_clicked_patch(event, source);
    if (!patch) return std::nullopt;
    const auto r = db.resolve_or_insert(*patch, event.timestamp_ms);
    if (stats) {
      ++stats->resolved;
      if (r.inserted) ++stats->inserted;
    }
    return r.id;
  };
}

}  // namespace acf
