#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "wmbench/error.hpp"
#include "wmbench/harness/dataset.hpp"
#include "wmbench/harness/evaluate.hpp"
#include "wmbench/harness/external_adapters.hpp"
#include "wmbench/harness/reference_models.hpp"
#include "wmbench/harness/report.hpp"
#include "wmbench/harness/session_server.hpp"
#include "wmbench/pose_eval.hpp"
#include "wmbench/trajectory.hpp"

namespace wmbench {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

/// Bad flag values detected after parsing; reported like parse errors.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename Fn>
auto as_usage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::uint64_t seed = 0;
  std::string out;
  int width = 256, height = 192, memory = 48, predict = 96;
  std::string shared_preset = "mid";
  int per_perspective = 8, train = 0, per_preset = 1;
  std::string presets;
  std::string perspectives = "first,third";
  std::string mirror_perspectives = "first";
  bool no_shared = false, no_generalization = false, no_mirror = false, force = false;
  unsigned jobs = 1;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  DatasetConfig cfg = as_usage([&] {
    DatasetConfig c;
    c.seed = a.seed;
    c.resolution = {a.width, a.height};
    c.memory_len = a.memory;
    c.predict_len = a.predict;
    c.shared_preset = a.shared_preset;
    c.shared_test_per_perspective = a.per_perspective;
    c.shared_train_per_perspective = a.train;
    c.generalization_per_preset = a.per_preset;
    if (!a.presets.empty()) c.generalization_presets = split_list(a.presets);
    c.perspectives.clear();
    for (const auto& p : split_list(a.perspectives)) c.perspectives.push_back(perspective_from_name(p));
    c.mirror_perspectives.clear();
    for (const auto& p : split_list(a.mirror_perspectives)) c.mirror_perspectives.push_back(perspective_from_name(p));
    c.shared_suite = !a.no_shared;
    c.generalization_suite = !a.no_generalization;
    c.mirror_suite = !a.no_mirror;
    c.jobs = a.jobs;
    c.validate();
    return c;
  });
  const DatasetManifest m = gen_dataset(cfg, a.out, a.force);
  out << "generated " << m.episodes.size() << " episodes in " << a.out << " (shared-action "
      << m.select(suite::kShared).size() << ", generalization " << m.select(suite::kGeneralization).size()
      << ", mirror " << m.select(suite::kMirror).size() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string dataset;
  std::string model;
  std::string command;
  std::string mode = "directory";
  std::string label;
  std::string context = "with-memory";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string poses_dir;
  std::vector<std::string> suites;
  std::string out;
  std::string work_dir;
  long frame_timeout_ms = 10000;
  bool verify = false;
  bool json = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.model.empty() == a.command.empty()) throw UsageError("give exactly one of --model or --cmd");
  const ContextPolicy policy = as_usage([&] { return context_policy_from_name(a.context); });
  for (const auto& s : a.suites) {
    if (s != suite::kShared && s != suite::kGeneralization && s != suite::kMirror) {
      throw UsageError("unknown suite '" + s + "'");
    }
  }
  std::unique_ptr<ModelAdapter> adapter;
  std::optional<fs::path> scratch;
  if (!a.model.empty()) {
    adapter = as_usage([&] {
      return std::unique_ptr<ModelAdapter>(
          make_reference_model(a.model, a.seed, policy, std::make_shared<FrameCache>()));
    });
  } else {
    ProcessOptions po;
    po.command = a.command;
    po.label = a.label;
    po.policy = policy;
    po.frame_timeout = std::chrono::milliseconds(a.frame_timeout_ms);
    if (a.mode == "directory") {
      fs::path work = a.work_dir;
      if (work.empty()) {
        work = fs::temp_directory_path() / ("wmbench-exchange-" + std::to_string(::getpid()));
        scratch = work;
      }
      adapter = std::make_unique<DirectoryAdapter>(po, work);
    } else if (a.mode == "streaming") {
      adapter = std::make_unique<StreamingAdapter>(po);
    } else {
      throw UsageError("unknown adapter mode '" + a.mode + "' (expected directory or streaming)");
    }
  }

  const DatasetManifest manifest = read_manifest(a.dataset);
  EvalConfig cfg;
  cfg.jobs = a.jobs;
  if (!a.poses_dir.empty()) cfg.poses_dir = a.poses_dir;
  cfg.suites = a.suites;
  cfg.verify_frames = a.verify;
  EvaluationReport rep;
  try {
    rep = evaluate(manifest, manifest_root(a.dataset), *adapter, cfg);
  } catch (...) {
    if (scratch) fs::remove_all(*scratch);
    throw;
  }
  if (scratch) fs::remove_all(*scratch);

  if (!a.out.empty()) write_report(rep, a.out);
  if (a.json) {
    out << to_json(rep).dump(2) << '\n';
  } else {
    out << format_table(rep.perspectives);
  }
  for (const auto& f : rep.failures) {
    err << "episode " << f.episode << " [" << f.stage << "/" << f.kind << "]: " << f.message << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MirrorArgs {
  std::string preset = "mid";
  std::string out;
  std::uint64_t seed = 0;
  std::string category = "landscape";
  std::string perspective = "first";
  int memory = 48;
  int width = 256, height = 192;
  bool json = false;
};

int cmd_mirror(const MirrorArgs& a, std::ostream& out) {
  const ActionSpaceConfig cfg = as_usage([&] { return preset(a.preset); });
  const SceneCategory cat = as_usage([&] { return category_from_name(a.category); });
  const Perspective persp = as_usage([&] { return perspective_from_name(a.perspective); });
  if (a.memory < 1) throw UsageError("--memory must be >= 1");

  std::optional<World> world;
  if (!a.out.empty()) world = build_world({a.seed, cat, 24000.0});

  bool all_ok = true;
  ojson rows = ojson::array();
  for (const auto& p : gen_mirror_paths()) {
    bool segments_ok = p.forward_actions.size() % kSegmentFrames == 0;
    for (std::size_t i = 0; i + 1 < p.forward_actions.size(); ++i) {
      const bool boundary = (i + 1) % kSegmentFrames == 0;
      if (!boundary && !(p.forward_actions[i] == p.forward_actions[i + 1])) segments_ok = false;
    }
    std::vector<ActionVector> both = p.forward_actions;
    both.insert(both.end(), p.reverse_actions.begin(), p.reverse_actions.end());
    std::vector<Pose> poses{Pose{}};
    const auto rest = apply_sequence(Pose{}, both, cfg);
    poses.insert(poses.end(), rest.begin(), rest.end());
    const bool free_ok = mirrors(poses);
    bool world_ok = true;
    if (world) {
      const auto actions = mirror_episode_actions(p.path_id, a.memory);
      const Pose start = start_pose(*world);
      const auto sim = simulate(*world, start, actions, cfg);
      const std::vector<Pose> probe(sim.begin() + (a.memory - 1), sim.end());
      world_ok = mirrors(probe);
      const Episode ep = record_episode(*world, cfg, persp, start, actions, a.memory,
                                        int(2 * p.forward_actions.size()), {a.width, a.height});
      char name_buf[32];
      std::snprintf(name_buf, sizeof name_buf, "path-%02d", p.path_id);
      write_episode(ep, fs::path(a.out) / name_buf);
    }
    const bool ok = segments_ok && free_ok && world_ok;
    all_ok = all_ok && ok;
    ojson row{{"path", p.path_id},
              {"label", p.label},
              {"segments", p.forward_actions.size() / kSegmentFrames},
              {"forward_frames", p.forward_actions.size()},
              {"segments_24", segments_ok},
              {"mirrors", free_ok}};
    if (world) row["mirrors_in_world"] = world_ok;
    rows.push_back(row);
    if (!a.json) {
      out << "path " << p.path_id << "  " << p.label << "  " << p.forward_actions.size()
          << " forward frames  " << (ok ? "ok" : "FAILED") << '\n';
    }
  }
  if (a.json) out << rows.dump(2) << '\n';
  return all_ok ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------

struct PoseArgs {
  std::string est, ref, out;
  int delta = 1;
  bool align = false;
  double max_offset = 0.5 / 24.0;
};

int cmd_align(const PoseArgs& a, std::ostream& out) {
  const PoseTrajectory est = read_tum(a.est);
  const PoseTrajectory ref = read_tum(a.ref);
  AssociationOptions opts;
  opts.max_offset = a.max_offset;
  const AlignmentResult r = align_trajectories(est, ref, opts);
  const PoseTrajectory aligned = apply_alignment(r.transform, est);
  const auto q = r.transform.rotation();
  const auto t = r.transform.translation();
  ojson j{{"scale", r.transform.scale()},
          {"rotation_xyzw", {q.x(), q.y(), q.z(), q.w()}},
          {"translation", {t.x(), t.y(), t.z()}},
          {"degenerate", r.degenerate},
          {"pairs", associate(est, ref, opts).size()},
          {"ate_before", ate_rmse(est, ref, opts)},
          {"ate_after", ate_rmse(aligned, ref, opts)}};
  if (!a.out.empty()) write_tum(aligned, a.out);
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_rpe(const PoseArgs& a, std::ostream& out) {
  if (a.delta < 1) throw UsageError("--delta must be >= 1");
  PoseTrajectory est = read_tum(a.est);
  const PoseTrajectory ref = read_tum(a.ref);
  AssociationOptions opts;
  opts.max_offset = a.max_offset;
  if (a.align) est = apply_alignment(align_trajectories(est, ref, opts).transform, est);
  const RpeResult r = rpe(est, ref, a.delta, opts);
  ojson j{{"trans_rmse", r.trans_rmse}, {"rot_rmse_deg", r.rot_rmse}, {"delta", r.delta}, {"pairs", r.pairs},
          {"aligned", a.align}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RecordArgs {
  std::uint64_t seed = 0;
  std::string category = "landscape";
  std::string preset = "mid";
  std::string perspective = "first";
  int width = 256, height = 192;
  std::string host = "127.0.0.1";
  unsigned short port = 8765;
  std::string save_dir = "sessions";
  double tick_hz = 24.0;
  bool lockstep = false;
};

int cmd_record(const RecordArgs& a, std::ostream& out) {
  SessionConfig cfg = as_usage([&] {
    SessionConfig c;
    c.world = {a.seed, category_from_name(a.category), 24000.0};
    c.preset = preset(a.preset).name;
    c.perspective = perspective_from_name(a.perspective);
    c.resolution = {a.width, a.height};
    c.host = a.host;
    c.port = a.port;
    c.save_dir = a.save_dir;
    c.tick_hz = a.tick_hz;
    c.lockstep = a.lockstep;
    if (!(c.tick_hz > 0.0)) throw ConfigError("--tick-hz must be positive");
    return c;
  });

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  SessionServer server(cfg);
  out << "listening on ws://" << cfg.host << ":" << server.port() << " (" << a.perspective << " person, preset "
      << cfg.preset << "); saving to " << cfg.save_dir.string() << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string scores;
  bool json = false;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<EvaluationReport> reports;
  for (const auto& in : a.inputs) reports.push_back(read_report(in));
  if (!a.scores.empty()) {
    if (reports.size() != 1) throw UsageError("--scores needs exactly one report");
    std::ifstream f(a.scores);
    if (!f) throw FormatError("cannot open " + a.scores);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("malformed scores file " + a.scores + ": " + e.what());
    }
    merge_external_scores(reports.front(), j);
  }
  std::vector<MetricReport> rows;
  for (const auto& r : reports) rows.insert(rows.end(), r.perspectives.begin(), r.perspectives.end());
  if (a.json) {
    ojson arr = ojson::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    out << arr.dump(2) << '\n';
  } else {
    out << format_table(rows);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"World-model memory and control benchmark toolkit", "wmbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a benchmark dataset");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--width", gen.width, "Frame width")->check(CLI::PositiveNumber);
  g->add_option("--height", gen.height, "Frame height")->check(CLI::PositiveNumber);
  g->add_option("--memory", gen.memory, "Memory length T")->check(CLI::PositiveNumber);
  g->add_option("--predict", gen.predict, "Prediction length k")->check(CLI::PositiveNumber);
  g->add_option("--shared-preset", gen.shared_preset, "Action space of the shared-action suite");
  g->add_option("--per-perspective", gen.per_perspective, "Shared-action test episodes per perspective")
      ->check(CLI::NonNegativeNumber);
  g->add_option("--train", gen.train, "Shared-action train episodes per perspective")->check(CLI::NonNegativeNumber);
  g->add_option("--presets", gen.presets, "Comma-separated generalization presets (default: all)");
  g->add_option("--per-preset", gen.per_preset, "Generalization episodes per preset and perspective")
      ->check(CLI::NonNegativeNumber);
  g->add_option("--perspectives", gen.perspectives, "Comma-separated perspectives");
  g->add_option("--mirror-perspectives", gen.mirror_perspectives, "Perspectives that get mirror probes");
  g->add_flag("--no-shared", gen.no_shared, "Skip the shared-action suite");
  g->add_flag("--no-generalization", gen.no_generalization, "Skip the generalization suite");
  g->add_flag("--no-mirror", gen.no_mirror, "Skip mirror probes");
  g->add_flag("--force", gen.force, "Replace an existing dataset in --out");
  g->add_option("--jobs", gen.jobs, "Worker threads (0 = all cores)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a model on a dataset");
  e->add_option("--dataset", ev.dataset, "Dataset directory or manifest")->required();
  e->add_option("--model", ev.model, "Reference model: oracle, frozen, noisy:<s>, drift:<e>, mismatch:<preset>");
  e->add_option("--cmd", ev.command, "External model command");
  e->add_option("--mode", ev.mode, "External adapter mode: directory or streaming");
  e->add_option("--label", ev.label, "Model label for external commands");
  e->add_option("--context", ev.context, "with-memory or without-memory");
  e->add_option("--seed", ev.seed, "Seed for stochastic reference models");
  e->add_option("--jobs", ev.jobs, "Worker threads (0 = all cores)");
  e->add_option("--poses-dir", ev.poses_dir, "Directory of <episode>.tum trajectories for RPE");
  e->add_option("--suite", ev.suites, "Restrict to a suite (repeatable)");
  e->add_option("--out", ev.out, "Write report.json and report.txt here");
  e->add_option("--work-dir", ev.work_dir, "Exchange directory for directory-mode models");
  e->add_option("--frame-timeout-ms", ev.frame_timeout_ms, "Per-frame timeout for external models")
      ->check(CLI::PositiveNumber);
  e->add_flag("--verify", ev.verify, "Re-render ground truth while loading episodes");
  e->add_flag("--json", ev.json, "Print the full JSON report");

  MirrorArgs mi;
  auto* m = app.add_subcommand("mirror", "List and verify the mirror-path probes");
  m->add_option("--preset", mi.preset, "Action space");
  m->add_option("--out", mi.out, "Also record each probe as an episode here");
  m->add_option("--seed", mi.seed, "World seed for --out");
  m->add_option("--category", mi.category, "Scene category for --out");
  m->add_option("--perspective", mi.perspective, "Perspective for --out");
  m->add_option("--memory", mi.memory, "Memory length T for --out");
  m->add_option("--width", mi.width, "Frame width")->check(CLI::PositiveNumber);
  m->add_option("--height", mi.height, "Frame height")->check(CLI::PositiveNumber);
  m->add_flag("--json", mi.json, "JSON output");

  PoseArgs al;
  auto* a = app.add_subcommand("align", "Sim(3)-align an estimated TUM trajectory to a reference");
  a->add_option("--est", al.est, "Estimated trajectory (TUM)")->required();
  a->add_option("--ref", al.ref, "Reference trajectory (TUM)")->required();
  a->add_option("--out", al.out, "Write the aligned trajectory here");
  a->add_option("--max-offset", al.max_offset, "Timestamp association tolerance in seconds");

  PoseArgs rp;
  auto* r = app.add_subcommand("rpe", "Relative pose error between two TUM trajectories");
  r->add_option("--est", rp.est, "Estimated trajectory (TUM)")->required();
  r->add_option("--ref", rp.ref, "Reference trajectory (TUM)")->required();
  r->add_option("--delta", rp.delta, "Frame interval");
  r->add_flag("--align", rp.align, "Sim(3)-align before computing RPE");
  r->add_option("--max-offset", rp.max_offset, "Timestamp association tolerance in seconds");

  RecordArgs rec;
  auto* rc = app.add_subcommand("record", "Serve a live recording session over websocket");
  rc->add_option("--seed", rec.seed, "World seed");
  rc->add_option("--category", rec.category, "Scene category");
  rc->add_option("--preset", rec.preset, "Action space");
  rc->add_option("--perspective", rec.perspective, "first or third");
  rc->add_option("--width", rec.width, "Frame width")->check(CLI::PositiveNumber);
  rc->add_option("--height", rec.height, "Frame height")->check(CLI::PositiveNumber);
  rc->add_option("--host", rec.host, "Listen address");
  rc->add_option("--port", rec.port, "Listen port (0 = any free port)");
  rc->add_option("--save-dir", rec.save_dir, "Where saved episodes go");
  rc->add_option("--tick-hz", rec.tick_hz, "Nominal tick rate");
  rc->add_flag("--lockstep", rec.lockstep, "One tick per action message");

  ReportArgs rpa;
  auto* re = app.add_subcommand("report", "Tabulate one or more report.json files");
  re->add_option("inputs", rpa.inputs, "report.json files or report directories")->required();
  re->add_option("--scores", rpa.scores, "External aesthetic/imaging scores (JSON keyed by perspective)");
  re->add_flag("--json", rpa.json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& s) {
    return app.exit(s, out, err);
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (e->parsed()) return cmd_eval(ev, out, err);
    if (m->parsed()) return cmd_mirror(mi, out);
    if (a->parsed()) return cmd_align(al, out);
    if (r->parsed()) return cmd_rpe(rp, out);
    if (rc->parsed()) return cmd_record(rec, out);
    if (re->parsed()) return cmd_report(rpa, out);
  } catch (const UsageError& ue) {
    err << "error: " << ue.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace wmbench
