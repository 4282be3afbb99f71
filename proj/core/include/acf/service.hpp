#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acf/config.hpp"
#include "acf/image.hpp"
#include "acf/model.hpp"
#include "acf/patch_db.hpp"
#include "acf/vocabulary.hpp"

namespace acf {

struct Request {
  std::string method;  // "GET", "POST"
  std::string path;    // "/v1/sessions/s1/predict"
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  nlohmann::json body;
  std::string content_type = "application/json";
  std::string raw;  // non-JSON payloads (images)

  std::string payload() const { return raw.empty() ? body.dump() : raw; }
};

/// Keep-set for a named filter: "buttons", "keys", "clicks", "scrolls",
/// "mouse" (buttons, clicks and scrolls), or a comma-separated union.
/// Throws ContractViolation on an unknown name.
std::set<int> filter_keep_set(const std::string& spec, const ActionVocabulary& vocab);

/// The replay/prediction API behind the /v1 HTTP routes. Independent of any
/// transport: handle() maps a request to a response and never throws.
///
/// Sessions are replayed action logs. Each session is mutated by one request
/// at a time; the model, vocabulary and patch store are shared read-only.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<const Model> model, std::shared_ptr<const ActionVocabulary> vocab,
          std::shared_ptr<const PatchDb> patches);

  /// Loads checkpoint, vocabulary and patch store named by the config and
  /// checks that checkpoint and vocabulary belong together.
  static std::unique_ptr<Service> from_config(const ServiceConfig& config);

  Response handle(const Request& request);

  const ServiceConfig& config() const { return config_; }
  std::size_t session_count() const;

 private:
  struct Session {
    std::mutex mu;
    std::vector<ActionRecord> log;
    std::size_t cursor = 0;
    std::vector<ActionRecord> history;  // taken actions plus what-if insertions
    std::filesystem::path screens;      // base directory for screenshot refs
  };

  struct Located {
    PatchId id;
    Rect rect;
    double score = 0.0;
  };

  Response create_session(const Request& request);
  Response step(Session& s, const Request& request);
  Response whatif(Session& s, const nlohmann::json& body);
  Response undo(Session& s);
  Response reset(Session& s);
  Response predict(Session& s, const Request& request);
  Response field(Session& s, const Request& request);
  Response screen(Session& s);
  Response patch_image(const std::string& name);
  Response vocabulary() const;

  std::shared_ptr<Session> find_session(const std::string& id) const;
  nlohmann::json predictions_json(const Session& s, int k, const std::set<int>* keep) const;
  nlohmann::json window_json(const Session& s) const;
  nlohmann::json state_json(const Session& s) const;
  std::optional<std::filesystem::path> current_screenshot(const Session& s) const;
  std::shared_ptr<const ImagePatch> load_screen(const std::filesystem::path& path);
  std::optional<Located> locate(PatchId id, const std::filesystem::path& shot, double* elapsed_ms);

  ServiceConfig config_;
  std::shared_ptr<const Model> model_;
  std::shared_ptr<const ActionVocabulary> vocab_;
  std::shared_ptr<const PatchDb> patches_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> next_session_{1};

  std::mutex cache_mu_;
  std::map<std::filesystem::path, std::shared_ptr<const ImagePatch>> screens_;
  std::map<std::pair<std::filesystem::path, std::uint32_t>, std::optional<Located>> located_;
};

}  // namespace acf
