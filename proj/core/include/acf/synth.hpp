#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acf/action_log.hpp"
#include "acf/click_resolver.hpp"
#include "acf/detector.hpp"
#include "acf/image.hpp"

namespace acf {

struct Emission {
  std::string action;  // action key; "button:N:..." refers to scene button N
  double p = 0.0;
};

struct WorkflowState {
  std::string name;
  std::string app;
  double dwell_s = 2.0;  // mean inter-action delay while in this state
  std::vector<Emission> emissions;
};

/// Order-1 Markov workflow: a hidden state emits one action per step, then
/// moves according to the transition matrix. With probability `noise` the
/// emitted action is drawn uniformly from the profile's whole alphabet.
///
/// JSON form:
///   {"name":..., "noise":0.1, "start":0,
///    "states":[{"name":..,"app":..,"dwell_s":..,"emissions":[{"action":"key:C","p":0.5},...]}],
///    "transition":[[...],...]}
struct WorkflowProfile {
  std::string name;
  std::vector<WorkflowState> states;
  std::vector<std::vector<double>> transition;
  double noise = 0.0;
  int start = 0;

  /// Throws DataError on non-stochastic rows, bad probabilities or
  /// non-canonical action keys.
  void validate() const;
  bool irreducible() const;

  nlohmann::json to_json() const;
  static WorkflowProfile from_json(const nlohmann::json& j);
  static WorkflowProfile load(const std::filesystem::path& path);
};

struct SceneButton {
  std::uint32_t id = 0;
  Rect rect;  // screen coordinates
};

/// One application window on an otherwise empty desktop.
struct SyntheticScene {
  int width = 0;
  int height = 0;
  std::string app;
  Rect window;
  std::vector<SceneButton> buttons;
};

struct RenderedScene {
  ImagePatch image;
  std::shared_ptr<const FixedDetector> detector;  // returns exactly the button rects
};

/// Deterministic rasterization. A button's look (size, colors, 6x4 glyph)
/// depends only on its id, so the same button renders identically wherever
/// it is placed.
RenderedScene render_scene(const SyntheticScene& scene);

/// Width and height of button `id`.
std::pair<int, int> button_size(std::uint32_t id);

/// Lays out `button_ids` on a grid inside a window placed at `offset`.
SyntheticScene make_scene(const std::string& app, const std::vector<std::uint32_t>& button_ids, Point offset,
                          int canvas_width, int canvas_height);

/// Distinct action keys of the profile in first-appearance order; noise
/// draws uniformly from this list.
std::vector<std::string> profile_alphabet(const WorkflowProfile& profile);

/// The app whose window shows button `id` (first state that emits it).
std::map<std::uint32_t, std::string> button_home_apps(const WorkflowProfile& profile);

struct GenerateOptions {
  std::string shot_prefix = "screens/s0_";  // screenshot refs are <prefix><app>.ppm
  std::int64_t start_ms = 0;
};

struct GeneratedSession {
  EventSession events;
  std::vector<UserAction> truth;     // buttons carry their scene id as PatchId
  std::vector<int> states;           // hidden state of each action
  std::map<std::string, SyntheticScene> scenes;  // by screenshot ref
};

/// Deterministic given (profile, length, seed, options).
GeneratedSession generate_session(const WorkflowProfile& profile, int length, std::uint64_t seed,
                                  const GenerateOptions& options = {});

/// Resolves clicks geometrically against the generated scenes, returning the
/// scene button id. Ground truth for the vision pipeline. `scenes` must
/// outlive the resolver.
PatchResolver make_scene_resolver(const std::map<std::string, SyntheticScene>& scenes);

/// MemoryScreenSource holding the rendered scenes of a session.
void add_rendered_scenes(MemoryScreenSource& source, const std::map<std::string, SyntheticScene>& scenes);

struct OracleEstimate {
  double accuracy = 0.0;
  double standard_error = 0.0;
  std::int64_t steps = 0;
};

/// Monte Carlo top-1 accuracy of the Bayes-optimal predictor that knows the
/// profile and filters the hidden state from everything observable (action
/// and application). Ties go to the earlier alphabet entry. Throws DataError
/// for reducible chains.
OracleEstimate oracle_accuracy(const WorkflowProfile& profile, std::int64_t steps = 200000, std::uint64_t seed = 1);

/// Writes `sessions` generated sessions of `length` actions into `out_dir`:
/// events.jsonl, truth.jsonl (ground-truth action keys) and screens/*.ppm
/// with .boxes.json annotations. Returns the generated sessions.
std::vector<GeneratedSession> write_simulation(const WorkflowProfile& profile, int sessions, int length,
                                               std::uint64_t seed, const std::filesystem::path& out_dir);

/// splitmix64 finalizer; used to derive per-session seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace acf
