#include "acf/cli.hpp"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "acf/action_log.hpp"
#include "acf/attraction.hpp"
#include "acf/checkpoint.hpp"
#include "acf/click_resolver.hpp"
#include "acf/config.hpp"
#include "acf/errors.hpp"
#include "acf/http_server.hpp"
#include "acf/ncc.hpp"
#include "acf/synth.hpp"
#include "acf/tokenizer.hpp"
#include "acf/trainer.hpp"

namespace acf::cli {

namespace {

namespace fs = std::filesystem;

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

/// Profiles may be named by path or by file name inside the bundled directory.
fs::path find_profile(const fs::path& p) {
  if (fs::exists(p)) return p;
  const fs::path bundled = fs::path(ACF_PROFILE_DIR) / p;
  if (fs::exists(bundled)) return bundled;
  throw DataError("profile " + p.string() + " not found");
}

ServiceConfig load_config(const std::optional<fs::path>& explicit_path) {
  const auto path = resolve_config_path(explicit_path);
  return path ? ServiceConfig::load(*path) : ServiceConfig{};
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

// ------------------------------------------------------------------ ingest

struct IngestArgs {
  fs::path events, out, patches = "patches", screens;
  std::string resolver = "vision";
  int screen_dpi = 0;
  std::optional<fs::path> config;
};

int ingest(const IngestArgs& a, std::ostream& out) {
  const ServiceConfig cfg = load_config(a.config);
  const auto sessions = read_event_log(a.events);
  const fs::path screens = a.screens.empty() ? a.events.parent_path() : a.screens;

  std::optional<PatchDb> db;
  std::unique_ptr<FileScreenSource> source;
  ClickStats clicks;
  PatchResolver resolver = no_patch_resolver();
  if (a.resolver == "vision") {
    db.emplace(PatchDb::open(a.patches, cfg.match));
    source = std::make_unique<FileScreenSource>(screens, a.screen_dpi > 0 ? a.screen_dpi : cfg.screen_dpi);
    resolver = make_screen_resolver(*db, *source, &clicks);
  }

  std::vector<ActionSession> actions;
  TokenizeStats stats;
  std::size_t total = 0;
  for (const auto& s : sessions) {
    actions.push_back(tokenize_to_records(s, resolver, &stats));
    total += actions.back().size();
  }
  write_action_log(a.out, actions);
  if (db) db->flush();

  out << nlohmann::json{{"sessions", actions.size()},
                        {"actions", total},
                        {"clicks", clicks.clicks},
                        {"resolved_clicks", clicks.resolved},
                        {"new_patches", clicks.inserted},
                        {"patches", db ? db->size() : 0},
                        {"ignored_key_ups", stats.ignored_key_ups},
                        {"coalesced_scrolls", stats.coalesced_scrolls}}
             .dump()
      << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- build-vocab

struct VocabArgs {
  std::vector<fs::path> actions;
  fs::path out, patches;
  int min_clicks = kDefaultMinClickCount;
};

int build_vocab(const VocabArgs& a, std::ostream& out) {
  std::vector<UserAction> all;
  std::vector<std::string> apps;
  std::map<PatchId, int> counts;
  for (const auto& path : a.actions) {
    for (const auto& session : read_action_log(path)) {
      for (const auto& r : session) {
        all.push_back(r.action);
        apps.push_back(r.app_id);
        if (const auto* b = std::get_if<ButtonClick>(&r.action.kind)) ++counts[b->patch_id];
      }
    }
  }
  if (!a.patches.empty()) counts = PatchDb::load(a.patches).click_counts();
  const ActionVocabulary vocab = build_vocabulary(all, counts, a.min_clicks, apps);
  vocab.save(a.out);
  out << nlohmann::json{{"size", vocab.size()}, {"apps", vocab.app_count()}, {"hash", vocab.hash()}}.dump() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  fs::path train, val, vocab, out = "model.acf", metrics = "metrics.csv";
  double val_fraction = 0.2;
  std::string cell = "gru";
  TrainingConfig config;
  bool with_seconds = false;
  bool verbose = false;
};

int train_cmd(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainingConfig config = a.config;
  config.cell = parse_cell_type(a.cell);
  config.validate();
  const ActionVocabulary vocab = ActionVocabulary::load(a.vocab);
  auto train_sessions = read_action_log(a.train);
  std::vector<ActionSession> val_sessions;
  if (!a.val.empty()) {
    val_sessions = read_action_log(a.val);
  } else {
    std::tie(train_sessions, val_sessions) = split_tail(train_sessions, a.val_fraction);
  }
  const auto train_corpus = encode_corpus(train_sessions, vocab);
  const auto val_corpus = encode_corpus(val_sessions, vocab);

  EpochCallback progress;
  if (a.verbose) {
    progress = [&err](const EpochMetrics& m) {
      err << "epoch " << m.epoch << " loss " << m.train_loss << " val_acc " << m.val_accuracy << '\n';
    };
  }
  const TrainResult result = train(train_corpus, val_corpus, config, dims_of(vocab), progress);
  save_checkpoint(a.out, result.model, vocab.hash(), result.adam);
  {
    auto csv = open_out(a.metrics);
    write_metrics_csv(csv, result.metrics, a.with_seconds);
  }
  const auto& best = result.metrics.at(static_cast<std::size_t>(result.best_epoch - 1));
  out << nlohmann::json{{"best_epoch", result.best_epoch},
                        {"val_accuracy", best.val_accuracy},
                        {"baseline_accuracy", marginal_baseline_accuracy(train_corpus, val_corpus)}}
             .dump()
      << '\n';
  return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  fs::path actions, vocab, checkpoint, records;
};

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  const ActionVocabulary vocab = ActionVocabulary::load(a.vocab);
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  check_compatible(ck.vocab_hash, ck.model, vocab);
  const auto corpus = encode_corpus(read_action_log(a.actions), vocab);
  const EvalResult r = evaluate(ck.model, corpus, !a.records.empty());
  if (!a.records.empty()) {
    auto csv = open_out(a.records);
    csv << "session,position,predicted,actual,prob,correct\n";
    for (const auto& e : r.records) {
      csv << e.sequence << ',' << e.position << ',' << vocab.key_of(e.predicted) << ',' << vocab.key_of(e.actual)
          << ',' << std::setprecision(17) << e.predicted_prob << ',' << (e.correct() ? 1 : 0) << '\n';
    }
  }
  out << "accuracy " << std::fixed << std::setprecision(6) << r.accuracy << " correct " << r.correct << " total "
      << r.total << " skipped_unknown " << r.skipped_unknown << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  fs::path profile, out = "sim";
  int length = 1000;
  int sessions = 1;
  std::uint64_t seed = 1;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  const WorkflowProfile profile = WorkflowProfile::load(find_profile(a.profile));
  const auto generated = write_simulation(profile, a.sessions, a.length, a.seed, a.out);
  std::size_t actions = 0;
  for (const auto& g : generated) actions += g.truth.size();
  out << nlohmann::json{{"sessions", generated.size()},
                        {"actions", actions},
                        {"events", (a.out / "events.jsonl").string()}}
             .dump()
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------- render-profile

struct RenderArgs {
  fs::path profile, out = "scenes";
  int offset_x = 0, offset_y = 0;
};

int render_profile(const RenderArgs& a, std::ostream& out) {
  const WorkflowProfile profile = WorkflowProfile::load(find_profile(a.profile));
  std::map<std::string, std::vector<std::uint32_t>> per_app;
  for (const auto& s : profile.states) per_app[s.app];
  for (const auto& [id, app] : button_home_apps(profile)) per_app[app].push_back(id);
  fs::create_directories(a.out);
  for (const auto& [app, ids] : per_app) {
    const SyntheticScene probe = make_scene(app, ids, {0, 0}, 1, 1);
    const SyntheticScene scene = make_scene(app, ids, {a.offset_x, a.offset_y}, probe.window.w + a.offset_x,
                                            probe.window.h + a.offset_y);
    const RenderedScene r = render_scene(scene);
    const fs::path file = a.out / (app + ".ppm");
    write_ppm(file, r.image);
    write_boxes(boxes_sidecar_path(file), r.detector->boxes());
    out << file.string() << ' ' << ids.size() << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------------ locate

struct LocateArgs {
  fs::path patch, screen;
  double threshold = 0.97;
  int screen_dpi = kReferenceDpi;
};

int locate(const LocateArgs& a, std::ostream& out) {
  const ImagePatch patch = read_ppm(a.patch);
  const ImagePatch screen = normalize_dpi(read_ppm(a.screen), a.screen_dpi);
  if (patch.width > screen.width || patch.height > screen.height)
    throw DataError("patch is larger than the screenshot");
  const auto start = std::chrono::steady_clock::now();
  const auto hits = locate_on_screen(patch, screen, a.threshold);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json matches = nlohmann::json::array();
  for (const auto& h : hits)
    matches.push_back({{"x", h.x}, {"y", h.y}, {"w", patch.width}, {"h", patch.height}, {"score", h.score}});
  out << nlohmann::json{{"matches", matches}, {"locate_ms", ms}}.dump() << '\n';
  return kExitOk;
}

// -------------------------------------------------------------- field-grid

struct FieldArgs {
  fs::path targets, out;
  double x0 = 0, y0 = 0, step = 8;
  int cols = 64, rows = 48;
  std::optional<fs::path> config;
  std::optional<double> gain, softening, max_pull;
  std::optional<bool> dead_zone;
};

/// Targets file: {"targets":[{"x":..,"y":..,"w":..,"h":..,"confidence":..}]}.
std::vector<AttractionTarget> read_targets(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<AttractionTarget> out;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& t : j.at("targets")) {
      const Rect r{t.at("x").get<int>(), t.at("y").get<int>(), t.at("w").get<int>(), t.at("h").get<int>()};
      const double c = t.at("confidence").get<double>();
      if (!r.valid() || c < 0.0) throw MalformedInput("invalid target in " + path.string());
      out.push_back({r.center(), r, c});
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
  return out;
}

int field_grid(const FieldArgs& a, std::ostream& out) {
  FieldConfig cfg = load_config(a.config).field;
  if (a.gain) cfg.gain = *a.gain;
  if (a.softening) cfg.softening_px = *a.softening;
  if (a.max_pull) cfg.max_pull_px = *a.max_pull;
  if (a.dead_zone) cfg.dead_zone = *a.dead_zone;
  cfg.validate();
  const auto targets = read_targets(a.targets);
  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::ostream& csv = a.out.empty() ? out : file;
  csv << "x,y,dx,dy\n" << std::setprecision(17);
  for (const auto& s : sample_field({a.x0, a.y0}, a.cols, a.rows, a.step, targets, cfg))
    csv << s.pos.x << ',' << s.pos.y << ',' << s.pull.x << ',' << s.pull.y << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- serve

struct ServeArgs {
  std::optional<fs::path> config;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<fs::path> checkpoint, vocab, patches, static_dir;
};

HttpServer* g_server = nullptr;

int serve(const ServeArgs& a, std::ostream& out) {
  ServiceConfig cfg = load_config(a.config);
  if (a.host) cfg.host = *a.host;
  if (a.port) cfg.port = *a.port;
  if (a.checkpoint) cfg.checkpoint = *a.checkpoint;
  if (a.vocab) cfg.vocab = *a.vocab;
  if (a.patches) cfg.patch_dir = *a.patches;
  if (a.static_dir) cfg.static_dir = *a.static_dir;
  auto service = Service::from_config(cfg);
  HttpServer server(*service, cfg.static_dir);
  const int port = server.bind(cfg.host, cfg.port);
  if (port < 0) throw DataError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  out << "listening on http://" << cfg.host << ':' << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.listen();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Next-action forecasting toolkit"};
  app.name("acf");
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ing = app.add_subcommand("ingest", "Tokenize an event log into an action log");
  ing->add_option("--events", ingest_args.events, "event log (JSONL)")->required();
  ing->add_option("--out", ingest_args.out, "action log to write")->required();
  ing->add_option("--patches", ingest_args.patches, "patch store directory");
  ing->add_option("--screens", ingest_args.screens, "base directory of screenshot refs (default: log directory)");
  ing->add_option("--screen-dpi", ingest_args.screen_dpi, "DPI of the screenshots");
  ing->add_option("--resolver", ingest_args.resolver, "click resolution")->check(CLI::IsMember({"vision", "none"}));
  ing->add_option("--config", ingest_args.config, "config file");

  VocabArgs vocab_args;
  auto* voc = app.add_subcommand("build-vocab", "Build the action vocabulary");
  voc->add_option("--actions", vocab_args.actions, "action logs")->required();
  voc->add_option("--out", vocab_args.out, "vocabulary JSON to write")->required();
  voc->add_option("--patches", vocab_args.patches, "take click counts from this patch store");
  voc->add_option("--min-clicks", vocab_args.min_clicks, "keep buttons clicked at least this often")
      ->check(CLI::NonNegativeNumber);

  TrainArgs train_args;
  auto* trn = app.add_subcommand("train", "Train a forecaster");
  trn->add_option("--train", train_args.train, "training action log")->required();
  trn->add_option("--val", train_args.val, "validation action log");
  trn->add_option("--val-fraction", train_args.val_fraction, "tail fraction held out when --val is absent");
  trn->add_option("--vocab", train_args.vocab, "vocabulary JSON")->required();
  trn->add_option("--out", train_args.out, "checkpoint to write");
  trn->add_option("--metrics", train_args.metrics, "metrics CSV to write");
  trn->add_option("--cell", train_args.cell, "gru or lstm")->check(CLI::IsMember({"gru", "lstm"}));
  trn->add_option("--n-past", train_args.config.n_past);
  trn->add_option("--hidden", train_args.config.hidden_size);
  trn->add_option("--layers", train_args.config.num_layers);
  trn->add_option("--lr", train_args.config.learning_rate);
  trn->add_option("--batch", train_args.config.batch_size);
  trn->add_option("--epochs", train_args.config.epochs);
  trn->add_option("--seed", train_args.config.seed);
  trn->add_flag("--with-seconds", train_args.with_seconds, "fill the wall-clock column of the metrics CSV");
  trn->add_flag("-v,--verbose", train_args.verbose, "report each epoch on stderr");

  EvalArgs eval_args;
  auto* evl = app.add_subcommand("eval", "Top-1 accuracy of a checkpoint on an action log");
  evl->add_option("--actions", eval_args.actions, "action log")->required();
  evl->add_option("--vocab", eval_args.vocab, "vocabulary JSON")->required();
  evl->add_option("--checkpoint", eval_args.checkpoint, "checkpoint")->required();
  evl->add_option("--records", eval_args.records, "per-position CSV to write");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Generate synthetic event logs and screenshots");
  sim->add_option("--profile", sim_args.profile, "workflow profile JSON")->required();
  sim->add_option("--length", sim_args.length, "actions per session")->check(CLI::PositiveNumber);
  sim->add_option("--sessions", sim_args.sessions, "number of sessions")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_args.seed);
  sim->add_option("--out", sim_args.out, "output directory");

  RenderArgs render_args;
  auto* ren = app.add_subcommand("render-profile", "Render the application windows of a profile");
  ren->add_option("--profile", render_args.profile, "workflow profile JSON")->required();
  ren->add_option("--out", render_args.out, "output directory");
  ren->add_option("--offset-x", render_args.offset_x)->check(CLI::NonNegativeNumber);
  ren->add_option("--offset-y", render_args.offset_y)->check(CLI::NonNegativeNumber);

  LocateArgs locate_args;
  auto* loc = app.add_subcommand("locate", "Find a patch on a screenshot");
  loc->add_option("--patch", locate_args.patch, "patch PPM")->required();
  loc->add_option("--screen", locate_args.screen, "screenshot PPM")->required();
  loc->add_option("--threshold", locate_args.threshold);
  loc->add_option("--screen-dpi", locate_args.screen_dpi)->check(CLI::PositiveNumber);

  FieldArgs field_args;
  auto* fld = app.add_subcommand("field-grid", "Sample the attraction field as CSV");
  fld->add_option("--targets", field_args.targets, "targets JSON")->required();
  fld->add_option("--out", field_args.out, "CSV to write (default: stdout)");
  fld->add_option("--x0", field_args.x0);
  fld->add_option("--y0", field_args.y0);
  fld->add_option("--cols", field_args.cols)->check(CLI::NonNegativeNumber);
  fld->add_option("--rows", field_args.rows)->check(CLI::NonNegativeNumber);
  fld->add_option("--step", field_args.step)->check(CLI::PositiveNumber);
  fld->add_option("--config", field_args.config);
  fld->add_option("--gain", field_args.gain);
  fld->add_option("--softening", field_args.softening);
  fld->add_option("--max-pull", field_args.max_pull);
  fld->add_option("--dead-zone", field_args.dead_zone);

  ServeArgs serve_args;
  auto* srv = app.add_subcommand("serve", "Run the HTTP prediction service");
  srv->add_option("--config", serve_args.config);
  srv->add_option("--host", serve_args.host);
  srv->add_option("--port", serve_args.port);
  srv->add_option("--checkpoint", serve_args.checkpoint);
  srv->add_option("--vocab", serve_args.vocab);
  srv->add_option("--patches", serve_args.patches);
  srv->add_option("--static", serve_args.static_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "acf: error: usage: " << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (ing->parsed()) return ingest(ingest_args, out);
    if (voc->parsed()) return build_vocab(vocab_args, out);
    if (trn->parsed()) return train_cmd(train_args, out, err);
    if (evl->parsed()) return eval_cmd(eval_args, out);
    if (sim->parsed()) return simulate(sim_args, out);
    if (ren->parsed()) return render_profile(render_args, out);
    if (loc->parsed()) return locate(locate_args, out);
    if (fld->parsed()) return field_grid(field_args, out);
    if (srv->parsed()) return serve(serve_args, out);
  } catch (const ContractViolation& e) {
    // Bad argument values that passed the parser (e.g. --n-past 0).
    err << "acf: error: usage: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "acf: error: " << e.kind() << ": " << one_line(e.what()) << '\n';
    return kExitDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "acf: error: io_error: " << one_line(e.what()) << '\n';
    return kExitDataError;
  }
  err << "acf: error: usage: no subcommand\n";
  return kExitUsage;
}

}  // namespace acf::cli
