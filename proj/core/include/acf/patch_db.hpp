#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "acf/action.hpp"
#include "acf/image.hpp"

namespace acf {

struct MatchConfig {
  double threshold = 0.97;
  int margin_px = 4;
  int size_tol_px = 6;
  double color_tol = 12.0;  // on the 0..255 scale
};

struct PatchEntry {
  PatchId id;
  ImagePatch patch;
  PatchFeatures features;
  int click_count = 1;
  std::int64_t created_ms = 0;
};

struct PatchMatch {
  PatchId id;
  double score = 0.0;
};

/// Best correlation between two patches after extending the larger one (by
/// area; `b` on ties) by `margin_px` replicated pixels on every side and
/// sliding the smaller one over it. Returns -1 when the smaller patch does
/// not fit inside the extended larger one.
double margin_similarity(const ImagePatch& a, const ImagePatch& b, int margin_px);

/// Deduplicated store of clicked widget patches.
///
/// Readers (match, lookups) take a shared lock; insertions and
/// resolve_or_insert take an exclusive lock, so concurrent clicks on the same
/// widget never create two entries. When opened on a directory the store
/// persists every new patch immediately; click counts reach disk on flush().
class PatchDb {
 public:
  explicit PatchDb(MatchConfig config = {});
  PatchDb(PatchDb&& other) noexcept;
  PatchDb& operator=(PatchDb&& other) noexcept;
  PatchDb(const PatchDb&) = delete;
  PatchDb& operator=(const PatchDb&) = delete;

  /// Opens (or creates) a store directory and binds the db to it.
  static PatchDb open(const std::filesystem::path& dir, MatchConfig config = {});
  /// Reads a store directory without binding to it.
  static PatchDb load(const std::filesystem::path& dir, MatchConfig config = {});
  void save(const std::filesystem::path& dir) const;
  void flush() const;

  /// Scans entries passing the prefilter, most-clicked first (ties by id),
  /// and returns the first whose margin similarity reaches `threshold`.
  std::optional<PatchMatch> match(const ImagePatch& candidate, double threshold, int margin_px) const;
  std::optional<PatchMatch> match(const ImagePatch& candidate) const;

  PatchId insert(const ImagePatch& patch, std::int64_t created_ms = 0);

  struct Resolution {
    PatchId id;
    bool inserted = false;
    double score = 1.0;
  };
  /// Atomically matches `patch` and either counts a click on the match or
  /// inserts it as a new entry.
  Resolution resolve_or_insert(const ImagePatch& patch, std::int64_t created_ms = 0);
  void record_click(PatchId id);

  std::size_t size() const;
  std::optional<PatchEntry> entry(PatchId id) const;
  std::vector<PatchEntry> entries() const;
  std::map<PatchId, int> click_counts() const;
  const MatchConfig& config() const { return config_; }
  std::uint32_t next_id() const;

 private:
  std::optional<PatchMatch> match_locked(const ImagePatch& candidate, double threshold,
                                         int margin_px) const;
  PatchId insert_locked(const ImagePatch& patch, std::int64_t created_ms);
  void write_manifest_locked(const std::filesystem::path& dir) const;

  MatchConfig config_;
  mutable std::shared_mutex mu_;
  std::map<PatchId, PatchEntry> entries_;
  std::uint32_t next_id_ = 0;
  std::optional<std::filesystem::path> dir_;
};

std::optional<PatchId> match_patch(const ImagePatch& candidate, const PatchDb& db, double threshold,
                                   int margin_px);
PatchId insert_patch(const ImagePatch& patch, PatchDb& db);

}  // namespace acf
