#include "acf/synth.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"
#include "acf/model.hpp"

namespace acf {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------- profile

namespace {

constexpr double kRowTolerance = 1e-9;

std::optional<std::uint32_t> button_id_of(const std::string& key) {
  const UserAction a = parse_action_key(key);
  if (const auto* b = std::get_if<ButtonClick>(&a.kind)) return b->patch_id.value;
  return std::nullopt;
}

}  // namespace

void WorkflowProfile::validate() const {
  const auto fail = [&](const std::string& what) { throw DataError("invalid profile '" + name + "': " + what); };
  if (states.empty()) fail("no states");
  const auto n = states.size();
  if (transition.size() != n) fail("transition matrix must have one row per state");
  for (std::size_t i = 0; i < n; ++i) {
    if (transition[i].size() != n) fail("transition row " + std::to_string(i) + " has wrong length");
    double sum = 0.0;
    for (double p : transition[i]) {
      if (!(p >= 0.0 && p <= 1.0)) fail("transition probabilities must lie in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) fail("transition row " + std::to_string(i) + " does not sum to 1");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) fail("noise must lie in [0, 1]");
  if (start < 0 || static_cast<std::size_t>(start) >= n) fail("start state out of range");
  for (const auto& s : states) {
    if (s.app.empty()) fail("state '" + s.name + "' has no app");
    if (!(s.dwell_s > 0.0)) fail("state '" + s.name + "' needs a positive dwell");
    if (s.emissions.empty()) fail("state '" + s.name + "' emits nothing");
    double sum = 0.0;
    std::set<std::string> seen;
    for (const auto& e : s.emissions) {
      if (!(e.p >= 0.0 && e.p <= 1.0)) fail("emission probabilities must lie in [0, 1]");
      sum += e.p;
      UserAction a;
      try {
        a = parse_action_key(e.action);
      } catch (const MalformedInput& err) {
        fail(err.what());
      }
      if (action_key(a) != e.action) fail("action '" + e.action + "' is not in canonical form");
      if (const auto* b = std::get_if<ButtonClick>(&a.kind); b && b->patch_id.value == 0)
        fail("button ids must be positive");
      if (!seen.insert(e.action).second) fail("state '" + s.name + "' lists '" + e.action + "' twice");
    }
    if (std::abs(sum - 1.0) > kRowTolerance) fail("emissions of '" + s.name + "' do not sum to 1");
  }
}

bool WorkflowProfile::irreducible() const {
  const auto n = transition.size();
  const auto reach_all = [&](bool reverse) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        const double p = reverse ? transition[j][i] : transition[i][j];
        if (p > 0.0 && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return n > 0 && reach_all(false) && reach_all(true);
}

nlohmann::json WorkflowProfile::to_json() const {
  nlohmann::json js = nlohmann::json::array();
  for (const auto& s : states) {
    nlohmann::json em = nlohmann::json::array();
    for (const auto& e : s.emissions) em.push_back({{"action", e.action}, {"p", e.p}});
    js.push_back({{"name", s.name}, {"app", s.app}, {"dwell_s", s.dwell_s}, {"emissions", em}});
  }
  return {{"name", name}, {"noise", noise}, {"start", start}, {"states", js}, {"transition", transition}};
}

WorkflowProfile WorkflowProfile::from_json(const nlohmann::json& j) {
  WorkflowProfile p;
  try {
    p.name = j.value("name", std::string("profile"));
    p.noise = j.value("noise", 0.0);
    p.start = j.value("start", 0);
    for (const auto& s : j.at("states")) {
      WorkflowState st;
      st.name = s.at("name").get<std::string>();
      st.app = s.at("app").get<std::string>();
      st.dwell_s = s.value("dwell_s", 2.0);
      for (const auto& e : s.at("emissions"))
        st.emissions.push_back({e.at("action").get<std::string>(), e.at("p").get<double>()});
      p.states.push_back(std::move(st));
    }
    p.transition = j.at("transition").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("bad profile JSON: ") + e.what());
  }
  p.validate();
  return p;
}

WorkflowProfile WorkflowProfile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open profile " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::vector<std::string> profile_alphabet(const WorkflowProfile& profile) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : profile.states)
    for (const auto& e : s.emissions)
      if (seen.insert(e.action).second) out.push_back(e.action);
  return out;
}

std::map<std::uint32_t, std::string> button_home_apps(const WorkflowProfile& profile) {
  std::map<std::uint32_t, std::string> out;
  for (const auto& s : profile.states)
    for (const auto& e : s.emissions)
      if (auto id = button_id_of(e.action)) out.emplace(*id, s.app);
  return out;
}

// ---------------------------------------------------------------- scenes

namespace {

constexpr int kCellW = 72;
constexpr int kCellH = 36;
constexpr int kTitleH = 16;
constexpr int kPad = 8;
constexpr int kMaxColumns = 4;
constexpr std::array<std::uint8_t, 3> kDesktop{40, 44, 52};
constexpr std::array<std::uint8_t, 3> kWindowBody{236, 236, 236};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

std::pair<int, int> window_size(std::size_t buttons) {
  const int cols = std::clamp(static_cast<int>(buttons), 1, kMaxColumns);
  const int rows = std::max(1, (static_cast<int>(buttons) + cols - 1) / cols);
  return {2 * kPad + cols * kCellW, kTitleH + 2 * kPad + rows * kCellH};
}

struct ButtonStyle {
  int w, h;
  std::array<std::uint8_t, 3> body, glyph;
  std::uint32_t bits;  // 6 x 4 glyph grid, row-major
};

ButtonStyle button_style(std::uint32_t id) {
  const std::uint64_t a = mix_seed(id);
  const std::uint64_t b = mix_seed(a);
  ButtonStyle s{};
  s.w = 28 + static_cast<int>(a % 37);
  s.h = 18 + static_cast<int>((a >> 8) % 13);
  for (int c = 0; c < 3; ++c) s.body[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(40 + (a >> (16 + 8 * c)) % 176);
  const double lum = 0.299 * s.body[0] + 0.587 * s.body[1] + 0.114 * s.body[2];
  s.glyph = lum < 128 ? std::array<std::uint8_t, 3>{232, 232, 232} : std::array<std::uint8_t, 3>{24, 24, 24};
  s.bits = static_cast<std::uint32_t>(b & 0xFFFFFF);
  const int set = std::popcount(s.bits);
  if (set < 6 || set > 18) s.bits ^= 0x5A5A5A & (set < 6 ? 0xFFFFFF : 0xA5A5A5);
  return s;
}

std::string sanitize(const std::string& app) {
  std::string out;
  for (char c : app) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

}  // namespace

std::pair<int, int> button_size(std::uint32_t id) {
  const auto s = button_style(id);
  return {s.w, s.h};
}

SyntheticScene make_scene(const std::string& app, const std::vector<std::uint32_t>& button_ids, Point offset,
                          int canvas_width, int canvas_height) {
  SyntheticScene scene;
  scene.width = canvas_width;
  scene.height = canvas_height;
  scene.app = app;
  const auto [ww, wh] = window_size(button_ids.size());
  scene.window = {offset.x, offset.y, ww, wh};
  const int cols = std::clamp(static_cast<int>(button_ids.size()), 1, kMaxColumns);
  for (std::size_t i = 0; i < button_ids.size(); ++i) {
    const int c = static_cast<int>(i) % cols;
    const int r = static_cast<int>(i) / cols;
    const auto [bw, bh] = button_size(button_ids[i]);
    scene.buttons.push_back({button_ids[i],
                             {offset.x + kPad + c * kCellW + (kCellW - bw) / 2,
                              offset.y + kTitleH + kPad + r * kCellH + (kCellH - bh) / 2, bw, bh}});
  }
  return scene;
}

RenderedScene render_scene(const SyntheticScene& scene) {
  RenderedScene out;
  out.image = ImagePatch(scene.width, scene.height, kDesktop);
  out.image.fill_rect(scene.window, kWindowBody);
  const std::uint64_t h = fnv1a(scene.app);
  const std::array<std::uint8_t, 3> title{static_cast<std::uint8_t>(60 + h % 120),
                                          static_cast<std::uint8_t>(60 + (h >> 8) % 120),
                                          static_cast<std::uint8_t>(60 + (h >> 16) % 120)};
  out.image.fill_rect({scene.window.x, scene.window.y, scene.window.w, kTitleH}, title);

  std::vector<DetectorBox> boxes;
  for (const auto& b : scene.buttons) {
    const ButtonStyle s = button_style(b.id);
    out.image.fill_rect(b.rect, s.body);
    const Rect inner{b.rect.x + 3, b.rect.y + 3, b.rect.w - 6, b.rect.h - 6};
    for (int gy = 0; gy < 4; ++gy) {
      for (int gx = 0; gx < 6; ++gx) {
        if (!((s.bits >> (gy * 6 + gx)) & 1U)) continue;
        const int x0 = inner.x + gx * inner.w / 6;
        const int x1 = inner.x + (gx + 1) * inner.w / 6;
        const int y0 = inner.y + gy * inner.h / 4;
        const int y1 = inner.y + (gy + 1) * inner.h / 4;
        out.image.fill_rect({x0, y0, x1 - x0, y1 - y0}, s.glyph);
      }
    }
    boxes.push_back({b.rect, WidgetKind::button});
  }
  out.detector = std::make_shared<FixedDetector>(std::move(boxes));
  return out;
}

// ---------------------------------------------------------------- sampling

namespace {

constexpr std::int64_t kMinGapMs = 400;
constexpr std::int64_t kKeyStepMs = 10;
constexpr std::int64_t kClickHoldMs = 80;
constexpr std::int64_t kScrollStepMs = 50;

/// Profile compiled to alphabet indices.
struct Compiled {
  std::vector<std::string> alphabet;
  std::vector<UserAction> actions;
  std::vector<std::vector<double>> emit;  // state x alphabet, noise-free
  std::vector<std::string> apps;          // sorted distinct apps
  std::vector<int> state_app;             // index into apps
  std::map<std::uint32_t, int> button_app;

  explicit Compiled(const WorkflowProfile& p) : alphabet(profile_alphabet(p)) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
      index[alphabet[i]] = static_cast<int>(i);
      actions.push_back(parse_action_key(alphabet[i]));
    }
    std::set<std::string> app_set;
    for (const auto& s : p.states) app_set.insert(s.app);
    apps.assign(app_set.begin(), app_set.end());
    const auto app_index = [&](const std::string& a) {
      return static_cast<int>(std::lower_bound(apps.begin(), apps.end(), a) - apps.begin());
    };
    for (const auto& s : p.states) {
      std::vector<double> row(alphabet.size(), 0.0);
      for (const auto& e : s.emissions) row[static_cast<std::size_t>(index[e.action])] = e.p;
      emit.push_back(std::move(row));
      state_app.push_back(app_index(s.app));
    }
    for (const auto& [id, app] : button_home_apps(p)) button_app[id] = app_index(app);
  }

  /// App shown while action `a` is emitted from state `s`.
  int observed_app(int a, int s) const {
    if (const auto* b = std::get_if<ButtonClick>(&actions[static_cast<std::size_t>(a)].kind))
      return button_app.at(b->patch_id.value);
    return state_app[static_cast<std::size_t>(s)];
  }
};

class Sampler {
 public:
  Sampler(const WorkflowProfile& p, const Compiled& c, std::uint64_t seed)
      : p_(p), c_(c), rng_(seed), state_(p.start) {}

  int state() const { return state_; }
  double uniform() { return unit_uniform(rng_()); }
  std::uint64_t bits() { return rng_(); }

  int emit() {
    if (uniform() < p_.noise) return static_cast<int>(rng_() % c_.alphabet.size());
    return categorical(c_.emit[static_cast<std::size_t>(state_)]);
  }

  void advance() { state_ = categorical(p_.transition[static_cast<std::size_t>(state_)]); }

  int uniform_int(int lo, int hi) {  // inclusive
    if (hi <= lo) return lo;
    return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  int categorical(const std::vector<double>& probs) {
    const double u = uniform();
    double acc = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last = static_cast<int>(i);
      if (u < acc) return last;
    }
    return last;  // rounding slack at the top of the row
  }

  const WorkflowProfile& p_;
  const Compiled& c_;
  std::mt19937_64 rng_;
  int state_;
};

const char* modifier_key_name(Modifier m) {
  switch (m) {
    case kCtrl: return "CTRL";
    case kShift: return "SHIFT";
    case kAlt: return "ALT";
    case kMeta: return "META";
  }
  return "CTRL";
}

}  // namespace

GeneratedSession generate_session(const WorkflowProfile& profile, int length, std::uint64_t seed,
                                  const GenerateOptions& options) {
  if (length < 1) throw ContractViolation("session length must be >= 1");
  profile.validate();
  const Compiled c(profile);
  Sampler sampler(profile, c, seed);
  GeneratedSession out;

  // One window per app, placed at a per-session random offset.
  std::map<std::string, std::vector<std::uint32_t>> app_buttons;
  for (const auto& app : c.apps) app_buttons[app];
  for (const auto& [id, app] : button_home_apps(profile)) app_buttons[app].push_back(id);
  int canvas_w = 0;
  int canvas_h = 0;
  for (const auto& [app, ids] : app_buttons) {
    const auto [w, h] = window_size(ids.size());
    canvas_w = std::max(canvas_w, w + 160);
    canvas_h = std::max(canvas_h, h + 120);
  }
  std::map<std::string, std::string> shot_of;
  std::map<std::string, const SyntheticScene*> scene_of;
  for (const auto& [app, ids] : app_buttons) {
    const auto [w, h] = window_size(ids.size());
    const Point offset{sampler.uniform_int(0, canvas_w - w), sampler.uniform_int(0, canvas_h - h)};
    const std::string ref = options.shot_prefix + sanitize(app) + ".ppm";
    out.scenes[ref] = make_scene(app, ids, offset, canvas_w, canvas_h);
    shot_of[app] = ref;
  }
  for (const auto& [app, ref] : shot_of) scene_of[app] = &out.scenes.at(ref);

  const auto first_scene = scene_of.at(profile.states[static_cast<std::size_t>(profile.start)].app);
  Point cursor{static_cast<int>(first_scene->window.center().x), static_cast<int>(first_scene->window.center().y)};
  std::int64_t t = options.start_ms;

  for (int step = 0; step < length; ++step) {
    const int s = sampler.state();
    if (step > 0) {
      const double dwell_ms = profile.states[static_cast<std::size_t>(s)].dwell_s * 1000.0;
      const auto gap = static_cast<std::int64_t>(std::llround(-std::log(1.0 - sampler.uniform()) * dwell_ms));
      t += std::max(kMinGapMs, gap);
    }
    const int a = sampler.emit();
    const UserAction& action = c.actions[static_cast<std::size_t>(a)];
    const std::string& app = c.apps[static_cast<std::size_t>(c.observed_app(a, s))];
    const SyntheticScene& scene = *scene_of.at(app);

    InputEvent base;
    base.app_id = app;
    base.window = scene.window;
    std::int64_t et = t;
    const auto push = [&](InputEvent e) {
      e.timestamp_ms = et;
      e.cursor = cursor;
      out.events.push_back(std::move(e));
    };

    if (const auto* k = std::get_if<Keystroke>(&action.kind)) {
      std::vector<Modifier> mods;
      for (Modifier m : {kCtrl, kShift, kAlt, kMeta})
        if (k->modifiers & m) mods.push_back(m);
      InputEvent e = base;
      for (Modifier m : mods) {
        e.kind = EventKind::key_down;
        e.key = modifier_key_name(m);
        push(e);
        et += kKeyStepMs;
      }
      e.key = k->key;
      e.kind = EventKind::key_down;
      push(e);
      et += 6 * kKeyStepMs;
      e.kind = EventKind::key_up;
      push(e);
      for (auto it = mods.rbegin(); it != mods.rend(); ++it) {
        et += kKeyStepMs;
        e.key = modifier_key_name(*it);
        push(e);
      }
    } else if (const auto* b = std::get_if<ButtonClick>(&action.kind)) {
      const auto it = std::find_if(scene.buttons.begin(), scene.buttons.end(),
                                   [&](const SceneButton& sb) { return sb.id == b->patch_id.value; });
      const Rect& r = it->rect;
      cursor = {sampler.uniform_int(r.x + 1, r.x + r.w - 1), sampler.uniform_int(r.y + 1, r.y + r.h - 1)};
      InputEvent e = base;
      e.kind = EventKind::mouse_down;
      e.button = b->button;
      e.screenshot_ref = shot_of.at(app);
      push(e);
      et += kClickHoldMs;
      e.kind = EventKind::mouse_up;
      e.screenshot_ref.reset();
      push(e);
    } else if (const auto* g = std::get_if<GenericClick>(&action.kind)) {
      // Title bars hold no widgets, so these clicks stay generic.
      const Rect& w = scene.window;
      cursor = {sampler.uniform_int(w.x + 2, w.x + w.w - 3), sampler.uniform_int(w.y + 2, w.y + kTitleH - 3)};
      InputEvent e = base;
      e.kind = EventKind::mouse_down;
      e.button = g->button;
      e.screenshot_ref = shot_of.at(app);
      push(e);
      et += kClickHoldMs;
      e.kind = EventKind::mouse_up;
      e.screenshot_ref.reset();
      push(e);
    } else {
      const auto& sc = std::get<Scroll>(action.kind);
      const int ticks = sampler.uniform_int(1, 3);
      InputEvent e = base;
      e.kind = EventKind::scroll;
      e.scroll_delta = sc.direction == ScrollDirection::up ? 1 : -1;
      for (int i = 0; i < ticks; ++i) {
        push(e);
        et += kScrollStepMs;
      }
    }

    UserAction truth = action;
    truth.timestamp_ms = t;
    out.truth.push_back(truth);
    out.states.push_back(s);
    sampler.advance();
  }
  return out;
}

PatchResolver make_scene_resolver(const std::map<std::string, SyntheticScene>& scenes) {
  return [&scenes](const InputEvent& e) -> std::optional<PatchId> {
    if (!e.screenshot_ref) return std::nullopt;
    const auto it = scenes.find(*e.screenshot_ref);
    if (it == scenes.end()) return std::nullopt;
    std::vector<DetectorBox> boxes;
    for (const auto& b : it->second.buttons) boxes.push_back({b.rect, WidgetKind::button});
    const auto hit = select_clicked_region(boxes, e.cursor);
    if (!hit) return std::nullopt;
    for (const auto& b : it->second.buttons)
      if (b.rect == hit->rect) return PatchId{b.id};
    return std::nullopt;
  };
}

void add_rendered_scenes(MemoryScreenSource& source, const std::map<std::string, SyntheticScene>& scenes) {
  for (const auto& [ref, scene] : scenes) {
    RenderedScene r = render_scene(scene);
    source.add(ref, {std::make_shared<const ImagePatch>(std::move(r.image)), r.detector});
  }
}

// ---------------------------------------------------------------- oracle

OracleEstimate oracle_accuracy(const WorkflowProfile& profile, std::int64_t steps, std::uint64_t seed) {
  profile.validate();
  if (!profile.irreducible()) throw DataError("profile '" + profile.name + "' has a reducible transition chain");
  if (steps < 1) throw ContractViolation("oracle needs at least one step");
  const Compiled c(profile);
  const auto n_states = profile.states.size();
  const auto n_actions = c.alphabet.size();
  const double noise_each = profile.noise / static_cast<double>(n_actions);

  // P(action | state) including noise.
  std::vector<std::vector<double>> like(n_states, std::vector<double>(n_actions));
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t a = 0; a < n_actions; ++a) like[s][a] = (1.0 - profile.noise) * c.emit[s][a] + noise_each;

  Sampler sampler(profile, c, seed);
  std::vector<double> belief(n_states, 0.0);
  belief[static_cast<std::size_t>(profile.start)] = 1.0;
  std::vector<double> next(n_states);
  std::int64_t correct = 0;

  for (std::int64_t step = 0; step < steps; ++step) {
    int best = 0;
    double best_p = -1.0;
    for (std::size_t a = 0; a < n_actions; ++a) {
      double p = 0.0;
      for (std::size_t s = 0; s < n_states; ++s) p += belief[s] * like[s][a];
      if (p > best_p) {
        best_p = p;
        best = static_cast<int>(a);
      }
    }
    const int s_true = sampler.state();
    const int a = sampler.emit();
    const int app = c.observed_app(a, s_true);
    correct += a == best;

    // Condition on the observed (action, app) and propagate one step.
    double mass = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
      belief[s] *= c.observed_app(a, static_cast<int>(s)) == app ? like[s][static_cast<std::size_t>(a)] : 0.0;
      mass += belief[s];
    }
    for (auto& b : belief) b /= mass;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n_states; ++s)
      for (std::size_t j = 0; j < n_states; ++j) next[j] += belief[s] * profile.transition[s][j];
    belief.swap(next);
    sampler.advance();
  }
  OracleEstimate est;
  est.steps = steps;
  est.accuracy = static_cast<double>(correct) / static_cast<double>(steps);
  est.standard_error = std::sqrt(est.accuracy * (1.0 - est.accuracy) / static_cast<double>(steps));
  return est;
}

// ---------------------------------------------------------------- files

std::vector<GeneratedSession> write_simulation(const WorkflowProfile& profile, int sessions, int length,
                                               std::uint64_t seed, const std::filesystem::path& out_dir) {
  if (sessions < 1) throw ContractViolation("need at least one session");
  std::filesystem::create_directories(out_dir / "screens");
  std::vector<GeneratedSession> generated;
  std::vector<EventSession> logs;
  std::int64_t t = 0;
  for (int i = 0; i < sessions; ++i) {
    GenerateOptions opt;
    opt.shot_prefix = "screens/s" + std::to_string(i) + "_";
    opt.start_ms = t;
    generated.push_back(generate_session(profile, length, mix_seed(seed + static_cast<std::uint64_t>(i)), opt));
    const auto& g = generated.back();
    t = g.events.back().timestamp_ms + 60000;
    logs.push_back(g.events);
    for (const auto& [ref, scene] : g.scenes) {
      const RenderedScene r = render_scene(scene);
      write_ppm(out_dir / ref, r.image);
      write_boxes(boxes_sidecar_path(out_dir / ref), r.detector->boxes());
    }
  }
  {
    std::ofstream ev(out_dir / "events.jsonl");
    write_event_log(ev, logs);
  }
  std::ofstream truth(out_dir / "truth.jsonl");
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (i > 0) truth << '\n';
    for (std::size_t k = 0; k < generated[i].truth.size(); ++k) {
      truth << nlohmann::json{{"action", action_key(generated[i].truth[k])},
                              {"state", generated[i].states[k]}}.dump()
            << '\n';
    }
  }
  if (!truth) throw DataError("failed writing simulation output to " + out_dir.string());
  return generated;
}

}  // namespace acf
