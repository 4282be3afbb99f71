#include "acf/service.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "acf/action_log.hpp"
#include "acf/attraction.hpp"
#include "acf/checkpoint.hpp"
#include "acf/errors.hpp"
#include "acf/ncc.hpp"
#include "acf/trainer.hpp"

namespace acf {

namespace {

constexpr std::int64_t kMaxGridCells = 1'000'000;
constexpr int kDefaultGridStep = 16;

Response json_response(int status, nlohmann::json body) {
  Response r;
  r.status = status;
  r.body = std::move(body);
  return r;
}

Response error_response(int status, const std::string& reason, const std::string& message) {
  return json_response(status, {{"error", reason}, {"reason", reason}, {"message", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::optional<std::string> query_value(const Request& r, const std::string& key) {
  const auto it = r.query.find(key);
  if (it == r.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

long long query_int(const Request& r, const std::string& key, long long fallback) {
  const auto v = query_value(r, key);
  if (!v) return fallback;
  long long out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || p != v->data() + v->size())
    throw ContractViolation("query parameter '" + key + "' must be an integer");
  return out;
}

double query_double(const Request& r, const std::string& key, double fallback) {
  const auto v = query_value(r, key);
  if (!v) return fallback;
  char* end = nullptr;
  const double out = std::strtod(v->c_str(), &end);
  if (end != v->c_str() + v->size() || !std::isfinite(out))
    throw ContractViolation("query parameter '" + key + "' must be a number");
  return out;
}

nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(body);
    if (!j.is_object()) throw MalformedInput("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("request body is not JSON: ") + e.what());
  }
}

std::string kind_name(const UserAction& a) {
  switch (a.kind.index()) {
    case 0: return "key";
    case 1: return "button";
    case 2: return "click";
    default: return "scroll";
  }
}

nlohmann::json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

}  // namespace

std::set<int> filter_keep_set(const std::string& spec, const ActionVocabulary& vocab) {
  std::set<std::string> names;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "mouse") {
      names.insert({"buttons", "clicks", "scrolls"});
    } else if (item == "buttons" || item == "keys" || item == "clicks" || item == "scrolls") {
      names.insert(item);
    } else {
      throw ContractViolation("unknown filter '" + item + "'");
    }
  }
  if (names.empty()) throw ContractViolation("empty filter");
  std::set<int> keep;
  for (int i = kReservedCount; i < vocab.size(); ++i) {
    const UserAction& a = vocab.action_of(i);
    const std::string kind = kind_name(a);
    if ((kind == "button" && names.count("buttons")) || (kind == "key" && names.count("keys")) ||
        (kind == "click" && names.count("clicks")) || (kind == "scroll" && names.count("scrolls")))
      keep.insert(i);
  }
  return keep;
}

Service::Service(ServiceConfig config, std::shared_ptr<const Model> model,
                 std::shared_ptr<const ActionVocabulary> vocab, std::shared_ptr<const PatchDb> patches)
    : config_(std::move(config)), model_(std::move(model)), vocab_(std::move(vocab)), patches_(std::move(patches)) {
  if (!model_ || !vocab_) throw ContractViolation("service needs a model and a vocabulary");
  if (!(model_->dims() == dims_of(*vocab_))) throw DataError("model dimensions do not match the vocabulary");
  if (!patches_) patches_ = std::make_shared<PatchDb>(config_.match);
}

std::unique_ptr<Service> Service::from_config(const ServiceConfig& config) {
  if (config.checkpoint.empty() || config.vocab.empty())
    throw DataError("service config must name a checkpoint and a vocabulary");
  Checkpoint ck = load_checkpoint(config.checkpoint);
  auto vocab = std::make_shared<const ActionVocabulary>(ActionVocabulary::load(config.vocab));
  check_compatible(ck.vocab_hash, ck.model, *vocab);
  std::shared_ptr<const PatchDb> db;
  if (std::filesystem::exists(config.patch_dir / "manifest.json"))
    db = std::make_shared<PatchDb>(PatchDb::load(config.patch_dir, config.match));
  else
    db = std::make_shared<PatchDb>(config.match);
  return std::make_unique<Service>(config, std::make_shared<const Model>(std::move(ck.model)), std::move(vocab),
                                   std::move(db));
}

std::size_t Service::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

Response Service::handle(const Request& request) {
  try {
    const auto parts = split_path(request.path);
    const bool get = request.method == "GET";
    const bool post = request.method == "POST";
    if (parts.empty() || parts[0] != "v1") return error_response(404, "not_found", "no route " + request.path);

    if (parts.size() == 2 && parts[1] == "health" && get) return json_response(200, {{"status", "ok"}});
    if (parts.size() == 2 && parts[1] == "vocab" && get) return vocabulary();
    if (parts.size() == 2 && parts[1] == "sessions" && post) return create_session(request);
    if (parts.size() == 3 && parts[1] == "patches" && get) return patch_image(parts[2]);

    if (parts.size() >= 3 && parts[1] == "sessions") {
      const auto session = find_session(parts[2]);
      std::lock_guard lock(session->mu);
      if (parts.size() == 3 && get) return json_response(200, state_json(*session));
      if (parts.size() == 4) {
        const std::string& op = parts[3];
        if (op == "step" && post) return step(*session, request);
        if (op == "whatif" && post) return whatif(*session, parse_body(request.body));
        if (op == "undo" && post) return undo(*session);
        if (op == "reset" && post) return reset(*session);
        if (op == "predict" && get) return predict(*session, request);
        if (op == "field" && get) return field(*session, request);
        if (op == "screen.ppm" && get) return screen(*session);
      }
    }
    return error_response(404, "not_found", "no route " + request.method + " " + request.path);
  } catch (const NotFound& e) {
    return error_response(404, e.kind(), e.what());
  } catch (const FilterError& e) {
    return error_response(409, e.kind(), e.what());
  } catch (const ContractViolation& e) {
    return error_response(400, e.kind(), e.what());
  } catch (const MalformedInput& e) {
    return error_response(400, e.kind(), e.what());
  } catch (const DataError& e) {
    return error_response(422, e.kind(), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

Response Service::create_session(const Request& request) {
  const auto body = parse_body(request.body);
  auto s = std::make_shared<Session>();
  try {
    if (body.contains("actions")) {
      for (const auto& r : body.at("actions")) s->log.push_back(record_from_json(r));
    } else if (body.contains("path")) {
      const std::filesystem::path path = body.at("path").get<std::string>();
      const auto sessions = read_action_log(path);
      const auto index = body.value("session", std::size_t{0});
      if (index >= sessions.size()) throw NotFound("log has no session " + std::to_string(index));
      s->log = sessions[index];
      s->screens = path.parent_path();
    } else {
      throw ContractViolation("body needs \"actions\" or \"path\"");
    }
    if (body.contains("screens")) s->screens = body.at("screens").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("bad session body: ") + e.what());
  }

  const std::string id = "s" + std::to_string(next_session_.fetch_add(1));
  {
    std::unique_lock lock(sessions_mu_);
    sessions_[id] = s;
  }
  nlohmann::json out = state_json(*s);
  out["session_id"] = id;
  return json_response(201, out);
}

Response Service::step(Session& s, const Request& request) {
  const auto body = parse_body(request.body);
  if (body.contains("action")) return whatif(s, body);
  if (s.cursor >= s.log.size()) {
    nlohmann::json out = state_json(s);
    out["eof"] = true;
    return json_response(200, out);
  }
  s.history.push_back(s.log[s.cursor++]);
  nlohmann::json out = state_json(s);
  out["taken"] = record_to_json(s.history.back());
  out["taken"]["label"] = action_label(s.history.back().action);
  return json_response(200, out);
}

Response Service::whatif(Session& s, const nlohmann::json& body) {
  ActionRecord r;
  try {
    r.action = parse_action_key(body.at("action").get<std::string>());
  } catch (const nlohmann::json::exception&) {
    throw MalformedInput("what-if body needs a string \"action\"");
  }
  if (!s.history.empty()) {
    const ActionRecord& last = s.history.back();
    r.action.timestamp_ms = last.action.timestamp_ms;
    r.app_id = last.app_id;
    r.rel_x = last.rel_x;
    r.rel_y = last.rel_y;
  }
  r.app_id = body.value("app", r.app_id);
  r.rel_x = body.value("rx", r.rel_x);
  r.rel_y = body.value("ry", r.rel_y);
  r.synthetic = true;
  s.history.push_back(std::move(r));
  return json_response(200, state_json(s));
}

Response Service::undo(Session& s) {
  if (s.history.empty() || !s.history.back().synthetic)
    return error_response(409, "nothing_to_undo", "the last history entry is not a what-if insertion");
  s.history.pop_back();
  return json_response(200, state_json(s));
}

Response Service::reset(Session& s) {
  s.cursor = 0;
  s.history.clear();
  return json_response(200, state_json(s));
}

Response Service::predict(Session& s, const Request& request) {
  const long long k = query_int(request, "k", config_.top_k);
  if (k < 1) throw ContractViolation("k must be >= 1");
  nlohmann::json out = {{"cursor", s.cursor}, {"k", k}, {"window", window_json(s)}};
  if (const auto filter = query_value(request, "filter")) {
    const std::set<int> keep = filter_keep_set(*filter, *vocab_);
    out["filter"] = *filter;
    out["predictions"] = predictions_json(s, static_cast<int>(k), &keep);
  } else {
    out["predictions"] = predictions_json(s, static_cast<int>(k), nullptr);
  }
  return json_response(200, out);
}

nlohmann::json Service::predictions_json(const Session& s, int k, const std::set<int>* keep) const {
  nlohmann::json out = nlohmann::json::array();
  int rank = 1;
  for (const auto& p : predict_topk(*model_, *vocab_, s.history, k, keep)) {
    nlohmann::json e = {{"rank", rank++},
                        {"index", p.index},
                        {"action", action_key(p.action)},
                        {"label", action_label(p.action)},
                        {"kind", kind_name(p.action)},
                        {"prob", p.prob}};
    if (const auto* b = std::get_if<ButtonClick>(&p.action.kind))
      e["patch_ref"] = "/v1/patches/" + std::to_string(b->patch_id.value) + ".ppm";
    out.push_back(std::move(e));
  }
  return out;
}

nlohmann::json Service::window_json(const Session& s) const {
  // The entries the model actually sees: the last n_past known actions.
  std::vector<const ActionRecord*> used;
  const auto n_past = static_cast<std::size_t>(model_->config().n_past);
  for (std::size_t i = s.history.size(); i-- > 0 && used.size() < n_past;) {
    if (vocab_->index_of(s.history[i].action) != kUnkIndex) used.push_back(&s.history[i]);
  }
  nlohmann::json out = nlohmann::json::array();
  for (auto it = used.rbegin(); it != used.rend(); ++it) {
    out.push_back({{"action", action_key((*it)->action)},
                   {"label", action_label((*it)->action)},
                   {"synthetic", (*it)->synthetic}});
  }
  return out;
}

nlohmann::json Service::state_json(const Session& s) const {
  return {{"cursor", s.cursor},
          {"length", s.log.size()},
          {"eof", s.cursor >= s.log.size()},
          {"history_size", s.history.size()},
          {"window", window_json(s)},
          {"predictions", predictions_json(s, config_.top_k, nullptr)}};
}

std::optional<std::filesystem::path> Service::current_screenshot(const Session& s) const {
  const auto resolve = [&](const std::string& ref) {
    const std::filesystem::path p = ref;
    return p.is_relative() ? s.screens / p : p;
  };
  for (auto it = s.history.rbegin(); it != s.history.rend(); ++it)
    if (!it->synthetic && it->screenshot_ref) return resolve(*it->screenshot_ref);
  for (const auto& r : s.log)
    if (r.screenshot_ref) return resolve(*r.screenshot_ref);
  return std::nullopt;
}

std::shared_ptr<const ImagePatch> Service::load_screen(const std::filesystem::path& path) {
  std::lock_guard lock(cache_mu_);
  auto& slot = screens_[path];
  if (!slot) {
    ImagePatch img = read_ppm(path);
    img.dpi = config_.screen_dpi;
    slot = std::make_shared<const ImagePatch>(std::move(img));
  }
  return slot;
}

std::optional<Service::Located> Service::locate(PatchId id, const std::filesystem::path& shot, double* elapsed_ms) {
  const auto key = std::make_pair(shot, id.value);
  {
    std::lock_guard lock(cache_mu_);
    if (const auto it = located_.find(key); it != located_.end()) return it->second;
  }
  const auto start = std::chrono::steady_clock::now();
  std::optional<Located> found;
  const auto entry = patches_->entry(id);
  if (entry) {
    const auto screen = load_screen(shot);
    const ImagePatch normalized = normalize_dpi(*screen, screen->dpi);
    const double back = static_cast<double>(screen->dpi) / kReferenceDpi;
    if (entry->patch.width <= normalized.width && entry->patch.height <= normalized.height) {
      const auto hits = locate_on_screen(entry->patch, normalized, config_.match.threshold);
      if (!hits.empty()) {
        const auto& h = hits.front();
        found = Located{id,
                        {static_cast<int>(std::lround(h.x * back)), static_cast<int>(std::lround(h.y * back)),
                         static_cast<int>(std::lround(entry->patch.width * back)),
                         static_cast<int>(std::lround(entry->patch.height * back))},
                        h.score};
      }
    }
  }
  *elapsed_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::lock_guard lock(cache_mu_);
  located_[key] = found;
  return found;
}

Response Service::field(Session& s, const Request& request) {
  const long long k = query_int(request, "k", config_.top_k);
  if (k < 1) throw ContractViolation("k must be >= 1");
  nlohmann::json out = {{"samples", nlohmann::json::array()}, {"targets", nlohmann::json::array()},
                        {"locate_ms", 0.0}};
  const auto shot = current_screenshot(s);
  if (!shot) {
    out["reason"] = "no_screenshot";
    return json_response(200, out);
  }
  if (!std::filesystem::exists(*shot)) throw NotFound("screenshot " + shot->string() + " is missing");
  const auto screen = load_screen(*shot);

  double locate_ms = 0.0;
  std::vector<AttractionTarget> targets;
  for (const auto& p : predict_topk(*model_, *vocab_, s.history, static_cast<int>(k))) {
    const auto* b = std::get_if<ButtonClick>(&p.action.kind);
    if (!b) continue;
    const auto hit = locate(b->patch_id, *shot, &locate_ms);
    if (!hit) continue;
    targets.push_back({hit->rect.center(), hit->rect, p.prob});
    out["targets"].push_back({{"patch_id", hit->id.value},
                              {"action", action_key(p.action)},
                              {"rect", rect_json(hit->rect)},
                              {"confidence", p.prob},
                              {"score", hit->score}});
  }
  out["locate_ms"] = locate_ms;

  const double step = query_double(request, "step", kDefaultGridStep);
  if (!(step > 0.0)) throw ContractViolation("step must be positive");
  const double x0 = query_double(request, "x0", 0.0);
  const double y0 = query_double(request, "y0", 0.0);
  const long long cols = query_int(request, "cols", static_cast<long long>(std::ceil(screen->width / step)));
  const long long rows = query_int(request, "rows", static_cast<long long>(std::ceil(screen->height / step)));
  if (cols < 0 || rows < 0 || cols * rows > kMaxGridCells) throw ContractViolation("grid too large or negative");
  out["grid"] = {{"x0", x0}, {"y0", y0}, {"cols", cols}, {"rows", rows}, {"step", step}};
  if (targets.empty()) {
    out["reason"] = "no_located_targets";
    return json_response(200, out);
  }
  for (const auto& f : sample_field({x0, y0}, static_cast<int>(cols), static_cast<int>(rows), step, targets,
                                    config_.field)) {
    out["samples"].push_back({{"x", f.pos.x}, {"y", f.pos.y}, {"dx", f.pull.x}, {"dy", f.pull.y}});
  }
  return json_response(200, out);
}

Response Service::screen(Session& s) {
  const auto shot = current_screenshot(s);
  if (!shot || !std::filesystem::exists(*shot)) throw NotFound("session has no screenshot");
  std::ostringstream os;
  write_ppm(os, *load_screen(*shot));
  Response r;
  r.content_type = "image/x-portable-pixmap";
  r.raw = os.str();
  return r;
}

Response Service::patch_image(const std::string& name) {
  const std::string suffix = ".ppm";
  if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
    throw NotFound("patches are served as <id>.ppm");
  std::uint32_t id = 0;
  const auto digits = std::string_view(name).substr(0, name.size() - suffix.size());
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (ec != std::errc{} || p != digits.data() + digits.size()) throw NotFound("bad patch id '" + name + "'");
  const auto entry = patches_->entry(PatchId{id});
  if (!entry) throw NotFound("no patch " + std::to_string(id));
  std::ostringstream os;
  write_ppm(os, entry->patch);
  Response r;
  r.content_type = "image/x-portable-pixmap";
  r.raw = os.str();
  return r;
}

Response Service::vocabulary() const {
  nlohmann::json actions = nlohmann::json::array();
  for (int i = kReservedCount; i < vocab_->size(); ++i) {
    const auto& a = vocab_->action_of(i);
    actions.push_back({{"index", i}, {"action", vocab_->key_of(i)}, {"label", action_label(a)}, {"kind", kind_name(a)}});
  }
  return json_response(200, {{"hash", vocab_->hash()}, {"size", vocab_->size()}, {"apps", vocab_->apps()},
                             {"actions", actions}});
}

}  // namespace acf
