#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acf/action.hpp"

namespace acf {

inline constexpr int kPadIndex = 0;
inline constexpr int kUnkIndex = 1;
inline constexpr int kReservedCount = 2;
inline constexpr int kDefaultMinClickCount = 6;

/// Dense, immutable bijection between retained user actions and indices
/// 0..V-1, with PAD = 0 and UNK = 1 reserved. Also carries the application
/// vocabulary used for the context one-hot block.
class ActionVocabulary {
 public:
  ActionVocabulary();

  /// Number of classes including the two reserved indices.
  int size() const { return static_cast<int>(keys_.size()); }
  int app_count() const { return static_cast<int>(apps_.size()); }
  int min_click_count() const { return min_click_count_; }

  /// Index of `action`, or kUnkIndex when it is not retained.
  int index_of(const UserAction& action) const;
  int index_of_key(const std::string& key) const;

  /// Throws ContractViolation for reserved or out-of-range indices.
  const UserAction& action_of(int index) const;
  const std::string& key_of(int index) const { return keys_.at(static_cast<std::size_t>(index)); }
  static bool is_reserved(int index) { return index < kReservedCount; }

  const std::map<std::string, int>& app_index_of() const { return app_index_; }
  const std::vector<std::string>& apps() const { return apps_; }

  /// Hex FNV-1a digest over action keys and app ids; identifies the
  /// vocabulary a checkpoint was trained against.
  std::string hash() const;

  nlohmann::json to_json() const;
  static ActionVocabulary from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ActionVocabulary load(const std::filesystem::path& path);

 private:
  friend ActionVocabulary build_vocabulary(std::span<const UserAction>,
                                           const std::map<PatchId, int>&, int,
                                           std::span<const std::string>);
  void add(const UserAction& action);
  void set_apps(std::vector<std::string> apps);

  std::vector<std::string> keys_;
  std::vector<UserAction> actions_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> apps_;
  std::map<std::string, int> app_index_;
  int min_click_count_ = kDefaultMinClickCount;
};

/// Retains every distinct Keystroke, GenericClick and Scroll, and every
/// ButtonClick whose patch has been clicked at least `min_click_count`
/// times. Indices are assigned in sorted key order, so the result does not
/// depend on the order of `actions`.
ActionVocabulary build_vocabulary(std::span<const UserAction> actions,
                                  const std::map<PatchId, int>& patch_click_counts,
                                  int min_click_count = kDefaultMinClickCount,
                                  std::span<const std::string> app_ids = {});

/// vocab index of `action`; UNK when not retained. Never returns PAD.
int encode_action(const UserAction& action, const ActionVocabulary& vocab);

}  // namespace acf
