#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "acf/detector.hpp"
#include "acf/patch_db.hpp"
#include "acf/tokenizer.hpp"

namespace acf {

/// A screenshot together with the detector that segments it.
struct Capture {
  std::shared_ptr<const ImagePatch> image;
  std::shared_ptr<const Detector> detector;
};

/// Looks up the capture a click event refers to through its screenshot_ref.
class ScreenSource {
 public:
  virtual ~ScreenSource() = default;
  virtual std::optional<Capture> capture(const std::string& ref) = 0;
};

/// Screenshots stored as PPM files relative to a base directory, each with an
/// optional "<file>.boxes.json" annotation. Images are cached after the first
/// load. When no annotation exists, `fallback` (may be null) is used.
class FileScreenSource final : public ScreenSource {
 public:
  FileScreenSource(std::filesystem::path base_dir, int screen_dpi = kReferenceDpi,
                   std::shared_ptr<const Detector> fallback = nullptr);
  std::optional<Capture> capture(const std::string& ref) override;

 private:
  std::filesystem::path base_;
  int dpi_;
  std::shared_ptr<const Detector> fallback_;
  std::mutex mu_;
  std::map<std::string, Capture> cache_;
};

/// In-memory captures, keyed by reference.
class MemoryScreenSource final : public ScreenSource {
 public:
  void add(std::string ref, Capture capture) { captures_[std::move(ref)] = std::move(capture); }
  std::optional<Capture> capture(const std::string& ref) override;

 private:
  std::map<std::string, Capture> captures_;
};

struct ClickStats {
  std::size_t clicks = 0;
  std::size_t resolved = 0;
  std::size_t inserted = 0;
};

/// Extracts the patch of the clicked widget for a mouse_down: detect boxes on
/// the event's screenshot, keep the smallest box under the cursor, crop it and
/// rescale to 96 DPI. nullopt when the event has no usable screenshot or no
/// box contains the cursor.
std::optional<ImagePatch> extract_clicked_patch(const InputEvent& event, ScreenSource& source);

/// PatchResolver that runs extract_clicked_patch and resolves the result
/// against `db`, inserting unseen widgets.
PatchResolver make_screen_resolver(PatchDb& db, ScreenSource& source, ClickStats* stats = nullptr);

}  // namespace acf
