#pragma once

// Frame-aligned episodes and the action sequences that drive them.
//
// Alignment convention: frames[0] is rendered at the start pose and
// actions[i] takes frame i to frame i+1, so an episode with N actions has
// N+1 poses and N+1 frames. The memory segment is frames [0, T) and the
// prediction targets are frames [T, T+k), produced by actions [T-1, T+k-1).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmbench/action_space.hpp"
#include "wmbench/frame.hpp"
#include "wmbench/pose_eval.hpp"
#include "wmbench/world_sim.hpp"

namespace wmbench {

inline constexpr int kSegmentFrames = 24;
inline constexpr double kFps = 24.0;
inline constexpr int kEpisodeFormatVersion = 1;
inline constexpr double kClosureTolerance = 1e-9;

struct MirrorPath {
  int path_id = 0;  ///< 1..10
  std::string label;
  std::vector<ActionVector> forward_actions;
  std::vector<ActionVector> reverse_actions;
};

/// The ten mirror probes: paths 1-8 are single 24-frame segments
/// (W, S, YawLeft, YawRight, A, D, PitchUp, PitchDown), paths 9 and 10 are
/// L-shaped translate/turn/translate composites.
std::vector<MirrorPath> gen_mirror_paths();

/// Concatenates 24-frame runs of the given primitives with their reversed inverse.
std::vector<ActionVector> make_revisit_loop(std::span<const ActionPrimitive> runs);

/// Random closed loop of `segments` single-primitive runs followed by the
/// undo sequence. Without a world the loop is checked in free space;
/// with one, it is simulated with collision from `start` and regenerated
/// (up to `max_retries` times) until every pose mirrors within 1e-9.
std::vector<ActionVector> gen_revisit_loop(std::uint64_t seed, int segments,
                                           const ActionSpaceConfig& cfg,
                                           const World* world = nullptr, const Pose& start = {},
                                           int max_retries = 64);

/// True when poses[i] and poses[n-1-i] agree within tol for all i.
bool mirrors(std::span<const Pose> poses, double tol = kClosureTolerance);

struct Episode {
  WorldSpec world;
  ActionSpaceConfig cfg;
  Perspective perspective = Perspective::FirstPerson;
  Resolution resolution;
  double fps = kFps;
  std::vector<ActionVector> actions;
  std::vector<Pose> camera_poses;                    ///< N+1
  std::optional<std::vector<Pose>> character_poses;  ///< N+1, third person only
  std::vector<Frame> frames;                         ///< N+1
  int memory_len = 48;
  int predict_len = 96;

  /// Poses driven by the actions (character for third person, camera otherwise).
  const std::vector<Pose>& agent_poses() const {
    return character_poses ? *character_poses : camera_poses;
  }
  std::size_t frame_count() const { return camera_poses.size(); }
  /// Actions a_{T+1..T+k}: the ones that produce the prediction targets.
  std::span<const ActionVector> prediction_actions() const;

  /// Checks sizes, the T/k split, and pose replay through the simulator.
  void validate_structure() const;
  friend bool operator==(const Episode&, const Episode&) = default;
};

Episode record_episode(const World& world, const ActionSpaceConfig& cfg, Perspective perspective,
                       const Pose& start, std::span<const ActionVector> actions, int memory_len,
                       int predict_len, Resolution res = {}, unsigned jobs = 1);

/// Camera poses for a perspective given the action-driven agent poses.
std::vector<Pose> camera_poses_for(const World& world, Perspective perspective,
                                   std::span<const Pose> agent_poses);

/// Directory layout:
///   meta.json        world spec, action space, perspective, T, k, start pose, checksums
///   actions.jsonl    one JSON string per line holding the ActionVector text form
///   poses.tum        camera ground truth
///   char_poses.tum   character ground truth (third person only)
///   frames/%06d.png  N+1 frames
void write_episode(const Episode& episode, const std::filesystem::path& dir);

struct ReadOptions {
  bool load_frames = true;
  bool rerender = false;  ///< also re-render every frame and compare bytes
};

/// Reads and validates an episode; replay and checksum mismatches raise
/// IntegrityError naming the first divergent frame, missing files raise FormatError.
Episode read_episode(const std::filesystem::path& dir, const ReadOptions& opts = {});

std::string frame_filename(std::size_t index);

}  // namespace wmbench
