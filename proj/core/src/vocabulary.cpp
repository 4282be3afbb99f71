#include "acf/vocabulary.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"

namespace acf {

namespace {

constexpr const char* kPadKey = "<PAD>";
constexpr const char* kUnkKey = "<UNK>";

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

ActionVocabulary::ActionVocabulary() {
  keys_ = {kPadKey, kUnkKey};
  actions_.resize(kReservedCount);
}

void ActionVocabulary::add(const UserAction& action) {
  std::string key = action_key(action);
  if (index_.contains(key)) return;
  UserAction a = action;
  a.timestamp_ms = 0;
  index_.emplace(key, size());
  keys_.push_back(std::move(key));
  actions_.push_back(std::move(a));
}

void ActionVocabulary::set_apps(std::vector<std::string> apps) {
  std::sort(apps.begin(), apps.end());
  apps.erase(std::unique(apps.begin(), apps.end()), apps.end());
  apps_ = std::move(apps);
  app_index_.clear();
  for (std::size_t i = 0; i < apps_.size(); ++i) app_index_[apps_[i]] = static_cast<int>(i);
}

int ActionVocabulary::index_of(const UserAction& action) const {
  return index_of_key(action_key(action));
}

int ActionVocabulary::index_of_key(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? kUnkIndex : it->second;
}

const UserAction& ActionVocabulary::action_of(int index) const {
  if (index < kReservedCount || index >= size())
    throw ContractViolation("action_of: index " + std::to_string(index) +
                            " is reserved or out of range");
  return actions_[static_cast<std::size_t>(index)];
}

std::string ActionVocabulary::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& k : keys_) h = fnv1a(fnv1a(h, k), "\n");
  h = fnv1a(h, "--apps--\n");
  for (const auto& a : apps_) h = fnv1a(fnv1a(h, a), "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json ActionVocabulary::to_json() const {
  nlohmann::json actions = nlohmann::json::array();
  for (int i = kReservedCount; i < size(); ++i) {
    actions.push_back({{"index", i},
                       {"key", keys_[static_cast<std::size_t>(i)]},
                       {"label", action_label(actions_[static_cast<std::size_t>(i)])}});
  }
  return {{"min_click_count", min_click_count_},
          {"hash", hash()},
          {"actions", actions},
          {"apps", apps_}};
}

ActionVocabulary ActionVocabulary::from_json(const nlohmann::json& j) {
  ActionVocabulary v;
  try {
    v.min_click_count_ = j.at("min_click_count").get<int>();
    for (const auto& a : j.at("actions")) {
      const int index = a.at("index").get<int>();
      if (index != v.size())
        throw MalformedInput("vocabulary indices must be contiguous from 2");
      v.add(parse_action_key(a.at("key").get<std::string>()));
    }
    v.set_apps(j.at("apps").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("vocabulary json: ") + e.what());
  }
  if (j.contains("hash") && j["hash"].get<std::string>() != v.hash())
    throw MalformedInput("vocabulary hash mismatch");
  return v;
}

void ActionVocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

ActionVocabulary ActionVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
  return from_json(j);
}

ActionVocabulary build_vocabulary(std::span<const UserAction> actions,
                                  const std::map<PatchId, int>& patch_click_counts,
                                  int min_click_count, std::span<const std::string> app_ids) {
  std::map<std::string, const UserAction*> retained;
  for (const auto& a : actions) {
    if (const auto* click = std::get_if<ButtonClick>(&a.kind)) {
      auto it = patch_click_counts.find(click->patch_id);
      if (it == patch_click_counts.end() || it->second < min_click_count) continue;
    }
    retained.emplace(action_key(a), &a);
  }
  ActionVocabulary v;
  v.min_click_count_ = min_click_count;
  for (const auto& [key, action] : retained) v.add(*action);
  v.set_apps(std::vector<std::string>(app_ids.begin(), app_ids.end()));
  return v;
}

int encode_action(const UserAction& action, const ActionVocabulary& vocab) {
  return vocab.index_of(action);
}

}  // namespace acf
