#include "acf/patch_db.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"
#include "acf/ncc.hpp"

namespace acf {

namespace fs = std::filesystem;

double margin_similarity(const ImagePatch& a, const ImagePatch& b, int margin_px) {
  const bool a_larger = a.width * a.height > b.width * b.height;
  const ImagePatch& larger = a_larger ? a : b;
  const ImagePatch& smaller = a_larger ? b : a;
  const ImagePatch search = pad_replicate(larger, margin_px);
  if (smaller.width > search.width || smaller.height > search.height || smaller.empty()) return -1.0;
  return ncc(smaller, search).max();
}

PatchDb::PatchDb(MatchConfig config) : config_(config) {}

PatchDb::PatchDb(PatchDb&& other) noexcept {
  std::unique_lock lock(other.mu_);
  config_ = other.config_;
  entries_ = std::move(other.entries_);
  next_id_ = other.next_id_;
  dir_ = std::move(other.dir_);
}

PatchDb& PatchDb::operator=(PatchDb&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    config_ = other.config_;
    entries_ = std::move(other.entries_);
    next_id_ = other.next_id_;
    dir_ = std::move(other.dir_);
  }
  return *this;
}

std::optional<PatchMatch> PatchDb::match_locked(const ImagePatch& candidate, double threshold,
                                                int margin_px) const {
  const PatchFeatures features = compute_features(candidate);
  std::vector<const PatchEntry*> order;
  order.reserve(entries_.size());
  for (const auto& [id, e] : entries_) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const PatchEntry* x, const PatchEntry* y) {
    return x->click_count > y->click_count;
  });
  for (const PatchEntry* e : order) {
    if (!prefilter_compatible(features, e->features, config_.size_tol_px, config_.color_tol)) continue;
    const double score = margin_similarity(candidate, e->patch, margin_px);
    if (score >= threshold) return PatchMatch{e->id, score};
  }
  return std::nullopt;
}

std::optional<PatchMatch> PatchDb::match(const ImagePatch& candidate, double threshold,
                                         int margin_px) const {
  std::shared_lock lock(mu_);
  return match_locked(candidate, threshold, margin_px);
}

std::optional<PatchMatch> PatchDb::match(const ImagePatch& candidate) const {
  return match(candidate, config_.threshold, config_.margin_px);
}

PatchId PatchDb::insert_locked(const ImagePatch& patch, std::int64_t created_ms) {
  if (patch.empty()) throw ContractViolation("cannot insert an empty patch");
  PatchEntry e;
  e.id = PatchId{next_id_++};
  e.patch = patch;
  e.patch.dpi = kReferenceDpi;
  e.features = compute_features(patch);
  e.click_count = 1;
  e.created_ms = created_ms;
  const PatchId id = e.id;
  entries_.emplace(id, std::move(e));
  if (dir_) {
    write_ppm(*dir_ / (std::to_string(id.value) + ".ppm"), entries_.at(id).patch);
    write_manifest_locked(*dir_);
  }
  return id;
}

PatchId PatchDb::insert(const ImagePatch& patch, std::int64_t created_ms) {
  std::unique_lock lock(mu_);
  return insert_locked(patch, created_ms);
}

PatchDb::Resolution PatchDb::resolve_or_insert(const ImagePatch& patch, std::int64_t created_ms) {
  std::unique_lock lock(mu_);
  if (auto m = match_locked(patch, config_.threshold, config_.margin_px)) {
    ++entries_.at(m->id).click_count;
    return {m->id, false, m->score};
  }
  return {insert_locked(patch, created_ms), true, 1.0};
}

void PatchDb::record_click(PatchId id) {
  std::unique_lock lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFound("unknown patch " + std::to_string(id.value));
  ++it->second.click_count;
}

std::size_t PatchDb::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::uint32_t PatchDb::next_id() const {
  std::shared_lock lock(mu_);
  return next_id_;
}

std::optional<PatchEntry> PatchDb::entry(PatchId id) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<PatchEntry> PatchDb::entries() const {
  std::shared_lock lock(mu_);
  std::vector<PatchEntry> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(e);
  return out;
}

std::map<PatchId, int> PatchDb::click_counts() const {
  std::shared_lock lock(mu_);
  std::map<PatchId, int> out;
  for (const auto& [id, e] : entries_) out[id] = e.click_count;
  return out;
}

void PatchDb::write_manifest_locked(const fs::path& dir) const {
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& [id, e] : entries_) {
    manifest.push_back({{"id", id.value},
                        {"file", std::to_string(id.value) + ".ppm"},
                        {"w", e.patch.width},
                        {"h", e.patch.height},
                        {"mean_rgb", e.features.mean_rgb},
                        {"clicks", e.click_count},
                        {"created_ms", e.created_ms}});
  }
  const fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << manifest.dump(1) << '\n';
    if (!out) throw DataError("short write on " + tmp.string());
  }
  fs::rename(tmp, dir / "manifest.json");
}

void PatchDb::save(const fs::path& dir) const {
  std::shared_lock lock(mu_);
  fs::create_directories(dir);
  for (const auto& [id, e] : entries_) write_ppm(dir / (std::to_string(id.value) + ".ppm"), e.patch);
  write_manifest_locked(dir);
}

void PatchDb::flush() const {
  std::shared_lock lock(mu_);
  if (dir_) write_manifest_locked(*dir_);
}

PatchDb PatchDb::load(const fs::path& dir, MatchConfig config) {
  PatchDb db(config);
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot read " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
    for (const auto& m : manifest) {
      PatchEntry e;
      e.id = PatchId{m.at("id").get<std::uint32_t>()};
      e.patch = read_ppm(dir / m.at("file").get<std::string>());
      if (e.patch.width != m.at("w").get<int>() || e.patch.height != m.at("h").get<int>())
        throw MalformedInput("patch " + std::to_string(e.id.value) + ": size disagrees with manifest");
      e.features = compute_features(e.patch);
      e.click_count = m.at("clicks").get<int>();
      e.created_ms = m.value("created_ms", std::int64_t{0});
      db.next_id_ = std::max(db.next_id_, e.id.value + 1);
      db.entries_.emplace(e.id, std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedInput(manifest_path.string() + ": " + ex.what());
  }
  return db;
}

PatchDb PatchDb::open(const fs::path& dir, MatchConfig config) {
  PatchDb db = fs::exists(dir / "manifest.json") ? load(dir, config) : PatchDb(config);
  fs::create_directories(dir);
  db.dir_ = dir;
  db.flush();
  return db;
}

std::optional<PatchId> match_patch(const ImagePatch& candidate, const PatchDb& db, double threshold,
                                   int margin_px) {
  if (auto m = db.match(candidate, threshold, margin_px)) return m->id;
  return std::nullopt;
}

PatchId insert_patch(const ImagePatch& patch, PatchDb& db) { return db.insert(patch); }

}  // namespace acf
