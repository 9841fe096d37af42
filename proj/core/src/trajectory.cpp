#include "wmbench/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wmbench/error.hpp"
#include "wmbench/parallel.hpp"
#include "wmbench/rng.hpp"

namespace wmbench {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void append_run(std::vector<ActionVector>& out, ActionVector v, int frames = kSegmentFrames) {
  out.insert(out.end(), std::size_t(frames), v);
}

MirrorPath make_path(int id, std::string label, std::initializer_list<ActionPrimitive> segments) {
  MirrorPath p;
  p.path_id = id;
  p.label = std::move(label);
  for (auto s : segments) append_run(p.forward_actions, ActionVector{s});
  p.reverse_actions = reversed_inverse(p.forward_actions);
  return p;
}

}  // namespace

std::vector<MirrorPath> gen_mirror_paths() {
  using P = ActionPrimitive;
  return {
      make_path(1, "forward-back", {P::W}),
      make_path(2, "back-forward", {P::S}),
      make_path(3, "yaw-left-right", {P::YawLeft}),
      make_path(4, "yaw-right-left", {P::YawRight}),
      make_path(5, "left-right", {P::A}),
      make_path(6, "right-left", {P::D}),
      make_path(7, "pitch-up-down", {P::PitchUp}),
      make_path(8, "pitch-down-up", {P::PitchDown}),
      make_path(9, "L-forward-turn-right-forward", {P::W, P::YawRight, P::W}),
      make_path(10, "L-right-turn-left-forward", {P::D, P::YawLeft, P::W}),
  };
}

std::vector<ActionVector> make_revisit_loop(std::span<const ActionPrimitive> runs) {
  std::vector<ActionVector> out;
  out.reserve(runs.size() * kSegmentFrames * 2);
  for (auto p : runs) append_run(out, ActionVector{p});
  const auto back = reversed_inverse(out);
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

bool mirrors(std::span<const Pose> poses, double tol) {
  const std::size_t n = poses.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (!pose_distance(poses[i], poses[n - 1 - i]).within(tol)) return false;
  }
  return true;
}

std::vector<ActionVector> gen_revisit_loop(std::uint64_t seed, int segments,
                                           const ActionSpaceConfig& cfg, const World* world,
                                           const Pose& start, int max_retries) {
  if (segments < 1) throw ConfigError("revisit loop needs at least one segment");
  cfg.validate();
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    Rng rng(derive_seed(seed, std::uint64_t(attempt)));
    std::vector<ActionPrimitive> runs;
    for (int s = 0; s < segments; ++s) {
      ActionPrimitive p;
      do {
        p = kAllPrimitives[rng.below(kAllPrimitives.size())];
      } while (!runs.empty() && p == inverse(runs.back()));
      runs.push_back(p);
    }
    auto actions = make_revisit_loop(runs);
    std::vector<Pose> poses;
    bool ok = true;
    if (world) {
      poses = simulate(*world, start, actions, cfg);
      for (const auto& p : poses) ok = ok && world->in_bounds(p.position);
    } else {
      poses.push_back(start);
      const auto rest = apply_sequence(start, actions, cfg);
      poses.insert(poses.end(), rest.begin(), rest.end());
    }
    if (ok && mirrors(poses)) return actions;
  }
  std::string where = "free space";
  if (world) {
    where = "world seed " + std::to_string(world->spec.seed) + " category " +
            std::string(name(world->spec.category)) + " extent " + std::to_string(world->spec.extent);
  }
  throw ConfigError("revisit loop generation exhausted " + std::to_string(max_retries) +
                    " retries in " + where);
}

// ---------------------------------------------------------------------------

std::span<const ActionVector> Episode::prediction_actions() const {
  return std::span<const ActionVector>(actions).subspan(std::size_t(memory_len - 1),
                                                        std::size_t(predict_len));
}

std::vector<Pose> camera_poses_for(const World& world, Perspective perspective,
                                   std::span<const Pose> agent_poses) {
  if (perspective == Perspective::FirstPerson) return {agent_poses.begin(), agent_poses.end()};
  std::vector<Pose> cams;
  cams.reserve(agent_poses.size());
  for (const auto& p : agent_poses) cams.push_back(third_person_camera(p, world));
  return cams;
}

void Episode::validate_structure() const {
  const std::size_t n = actions.size() + 1;
  if (camera_poses.size() != n) throw IntegrityError("camera pose count does not match actions", 0);
  if (!frames.empty() && frames.size() != n) throw IntegrityError("frame count does not match actions", 0);
  if (memory_len < 1 || predict_len < 1 || std::size_t(memory_len + predict_len) > n) {
    throw IntegrityError("memory/prediction split exceeds episode length", 0);
  }
  if (character_poses.has_value() != (perspective == Perspective::ThirdPerson)) {
    throw IntegrityError("character poses must be present exactly for third-person episodes", 0);
  }
  if (character_poses && character_poses->size() != n) {
    throw IntegrityError("character pose count does not match actions", 0);
  }
  const World w = build_world(world);
  const auto replay = simulate(w, agent_poses().front(), actions, cfg);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(replay[i] == agent_poses()[i])) {
      throw IntegrityError("pose replay mismatch at frame " + std::to_string(i), long(i));
    }
  }
  const auto cams = camera_poses_for(w, perspective, replay);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(cams[i] == camera_poses[i])) {
      throw IntegrityError("camera pose mismatch at frame " + std::to_string(i), long(i));
    }
  }
}

Episode record_episode(const World& world, const ActionSpaceConfig& cfg, Perspective perspective,
                       const Pose& start, std::span<const ActionVector> actions, int memory_len,
                       int predict_len, Resolution res, unsigned jobs) {
  cfg.validate();
  if (memory_len < 1 || predict_len < 1) throw ConfigError("memory and prediction lengths must be >= 1");
  if (actions.size() + 1 < std::size_t(memory_len + predict_len)) {
    throw ConfigError("episode needs at least T+k-1 = " + std::to_string(memory_len + predict_len - 1) +
                      " actions, got " + std::to_string(actions.size()));
  }
  if (res.width <= 0 || res.height <= 0) throw ConfigError("episode resolution must be positive");

  const auto agent = simulate(world, start.normalized(), actions, cfg);
  for (std::size_t i = 0; i < agent.size(); ++i) {
    if (!world.in_bounds(agent[i].position)) {
      throw ConfigError("pose leaves world bounds at frame " + std::to_string(i));
    }
  }

  Episode ep;
  ep.world = world.spec;
  ep.cfg = cfg;
  ep.perspective = perspective;
  ep.resolution = res;
  ep.actions.assign(actions.begin(), actions.end());
  ep.camera_poses = camera_poses_for(world, perspective, agent);
  if (perspective == Perspective::ThirdPerson) ep.character_poses = agent;
  ep.memory_len = memory_len;
  ep.predict_len = predict_len;
  ep.frames.resize(agent.size());
  parallel_for(
      agent.size(),
      [&](std::size_t i) { ep.frames[i] = render_view(world, perspective, agent[i], res, int(i)); },
      jobs);
  return ep;
}

std::string frame_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", index);
  return buf;
}

namespace {

json pose_json(const Pose& p) {
  return json{{"x", p.position.x}, {"y", p.position.y}, {"z", p.position.z},
              {"yaw", p.yaw},      {"pitch", p.pitch}};
}

Pose pose_from_json(const json& j) {
  Pose p;
  p.position = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()};
  p.yaw = j.at("yaw").get<double>();
  p.pitch = j.at("pitch").get<double>();
  return p;
}

void check_against_tum(const std::vector<Pose>& replayed, const fs::path& file, double fps) {
  if (!fs::exists(file)) throw FormatError("missing " + file.string());
  const PoseTrajectory stored = read_tum(file);
  if (stored.size() != replayed.size()) {
    throw IntegrityError(file.filename().string() + " has " + std::to_string(stored.size()) +
                             " poses; replay produced " + std::to_string(replayed.size()),
                         long(std::min(stored.size(), replayed.size())));
  }
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    const TimedPose want = to_timed_pose(replayed[i], double(i) / fps);
    const TimedPose& got = stored.samples[i];
    if (got.timestamp != want.timestamp || got.translation != want.translation ||
        got.rotation.coeffs() != want.rotation.coeffs()) {
      throw IntegrityError("replay mismatch at frame " + std::to_string(i) + " (" +
                               file.filename().string() + ")",
                           long(i));
    }
  }
}

}  // namespace

void write_episode(const Episode& ep, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path frames_dir = dir / "frames";
  if (fs::exists(frames_dir)) fs::remove_all(frames_dir);
  fs::create_directories(frames_dir);

  json meta;
  meta["format_version"] = kEpisodeFormatVersion;
  meta["world"] = {{"seed", ep.world.seed},
                   {"category", std::string(name(ep.world.category))},
                   {"extent", ep.world.extent}};
  meta["action_space"] = {{"name", ep.cfg.name}, {"delta_p", ep.cfg.delta_p}, {"delta_r", ep.cfg.delta_r}};
  meta["perspective"] = std::string(name(ep.perspective));
  meta["resolution"] = {{"width", ep.resolution.width}, {"height", ep.resolution.height}};
  meta["fps"] = ep.fps;
  meta["memory_len"] = ep.memory_len;
  meta["predict_len"] = ep.predict_len;
  meta["start_pose"] = pose_json(ep.agent_poses().front());
  meta["frame_count"] = ep.frame_count();
  json sums = json::array();
  for (const auto& f : ep.frames) sums.push_back(to_hex(frame_checksum(f)));
  meta["frame_checksums"] = sums;
  {
    std::ofstream out(dir / "meta.json", std::ios::trunc);
    out << meta.dump(2) << '\n';
    if (!out) throw Error("write failed: " + (dir / "meta.json").string());
  }
  {
    std::ofstream out(dir / "actions.jsonl", std::ios::trunc);
    for (auto a : ep.actions) out << json(a.to_text()).dump() << '\n';
    if (!out) throw Error("write failed: " + (dir / "actions.jsonl").string());
  }
  write_tum(to_trajectory(ep.camera_poses, ep.fps), dir / "poses.tum");
  const fs::path char_file = dir / "char_poses.tum";
  if (ep.character_poses) {
    write_tum(to_trajectory(*ep.character_poses, ep.fps), char_file);
  } else if (fs::exists(char_file)) {
    fs::remove(char_file);
  }
  for (std::size_t i = 0; i < ep.frames.size(); ++i) {
    write_png(ep.frames[i], frames_dir / frame_filename(i));
  }
}

Episode read_episode(const fs::path& dir, const ReadOptions& opts) {
  const fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path)) throw FormatError("missing " + meta_path.string());
  Episode ep;
  std::vector<std::string> checksums;
  Pose start;
  std::size_t frame_count = 0;
  try {
    std::ifstream in(meta_path);
    const json meta = json::parse(in);
    const int version = meta.at("format_version").get<int>();
    if (version != kEpisodeFormatVersion) {
      throw FormatError("unsupported episode format version " + std::to_string(version));
    }
    const auto& w = meta.at("world");
    ep.world.seed = w.at("seed").get<std::uint64_t>();
    ep.world.category = category_from_name(w.at("category").get<std::string>());
    ep.world.extent = w.at("extent").get<double>();
    const auto& as = meta.at("action_space");
    ep.cfg.name = as.at("name").get<std::string>();
    ep.cfg.delta_p = as.at("delta_p").get<double>();
    ep.cfg.delta_r = as.at("delta_r").get<double>();
    ep.perspective = perspective_from_name(meta.at("perspective").get<std::string>());
    ep.resolution = {meta.at("resolution").at("width").get<int>(),
                     meta.at("resolution").at("height").get<int>()};
    ep.fps = meta.at("fps").get<double>();
    ep.memory_len = meta.at("memory_len").get<int>();
    ep.predict_len = meta.at("predict_len").get<int>();
    start = pose_from_json(meta.at("start_pose"));
    frame_count = meta.at("frame_count").get<std::size_t>();
    checksums = meta.at("frame_checksums").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  ep.cfg.validate();

  const fs::path actions_path = dir / "actions.jsonl";
  if (!fs::exists(actions_path)) throw FormatError("missing " + actions_path.string());
  {
    std::ifstream in(actions_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      try {
        std::string text = line;
        if (!text.empty() && text.front() == '"') text = json::parse(line).get<std::string>();
        ep.actions.push_back(ActionVector::parse(text));
      } catch (const std::exception& e) {
        throw FormatError(actions_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  const std::size_t n = ep.actions.size() + 1;
  if (frame_count != n || checksums.size() != n) {
    throw FormatError(dir.string() + ": frame_count " + std::to_string(frame_count) +
                      " inconsistent with " + std::to_string(ep.actions.size()) + " actions");
  }
  if (ep.memory_len < 1 || ep.predict_len < 1 || std::size_t(ep.memory_len + ep.predict_len) > n) {
    throw FormatError(dir.string() + ": memory/prediction split exceeds episode length");
  }

  // Replay the action log and compare with the stored ground truth.
  const World world = build_world(ep.world);
  const auto agent = simulate(world, start, ep.actions, ep.cfg);
  ep.camera_poses = camera_poses_for(world, ep.perspective, agent);
  check_against_tum(ep.camera_poses, dir / "poses.tum", ep.fps);
  if (ep.perspective == Perspective::ThirdPerson) {
    ep.character_poses = agent;
    check_against_tum(agent, dir / "char_poses.tum", ep.fps);
  }

  if (opts.load_frames) {
    ep.frames.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const fs::path fp = dir / "frames" / frame_filename(i);
      if (!fs::exists(fp)) throw FormatError("missing frame file " + fp.string());
      Frame f = read_png(fp);
      if (f.resolution() != ep.resolution) {
        throw FormatError(fp.string() + ": resolution " + std::to_string(f.width) + "x" +
                          std::to_string(f.height) + " differs from episode resolution");
      }
      if (to_hex(frame_checksum(f)) != checksums[i]) {
        throw IntegrityError("frame checksum mismatch at frame " + std::to_string(i), long(i));
      }
      f.frame_index = int(i);
      ep.frames[i] = std::move(f);
    }
    if (opts.rerender) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!render_view(world, ep.perspective, agent[i], ep.resolution, int(i)).same_pixels(ep.frames[i])) {
          throw IntegrityError("re-rendered frame differs at frame " + std::to_string(i), long(i));
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const fs::path fp = dir / "frames" / frame_filename(i);
      if (!fs::exists(fp)) throw FormatError("missing frame file " + fp.string());
    }
  }
  return ep;
}

}  // namespace wmbench
