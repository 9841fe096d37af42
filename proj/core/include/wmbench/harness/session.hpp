#pragma once

// Live recording session state, independent of any transport.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wmbench/trajectory.hpp"

namespace wmbench {

struct SessionConfig {
  WorldSpec world;
  std::string preset = "mid";
  Perspective perspective = Perspective::FirstPerson;
  Resolution resolution;
  double tick_hz = 24.0;
  /// Advance exactly one tick per received action message instead of on a
  /// timer. Recorded episodes are identical either way; this only removes
  /// wall-clock dependence from scripted clients.
  bool lockstep = false;
  std::filesystem::path save_dir = "sessions";
  std::string host = "127.0.0.1";
  unsigned short port = 0;  ///< 0 picks a free port
};

/// Latest-value mailbox between the network reader and the tick loop: a
/// tick sees the most recent mask, never a backlog. The value persists
/// until replaced, so a held key stays held.
class ActionMailbox {
 public:
  void put(ActionVector a) { mask_.store(a.mask(), std::memory_order_relaxed); }
  ActionVector take() const { return ActionVector(mask_.load(std::memory_order_relaxed)); }

 private:
  std::atomic<std::uint8_t> mask_{0};
};

class SessionCore {
 public:
  explicit SessionCore(const SessionConfig& cfg);

  /// Advances one frame with `action`, renders, records, and returns the frame.
  const Frame& tick(ActionVector action);
  const Frame& current_frame() const { return frames_.back(); }
  const Pose& current_pose() const { return agent_.back(); }
  std::size_t ticks() const { return actions_.size(); }
  Perspective perspective() const { return perspective_; }
  const SessionConfig& config() const { return cfg_; }

  /// Episode with T = ceil((N+1)/3) memory frames and the rest as targets.
  /// Throws ConfigError with fewer than two frames.
  Episode to_episode() const;
  /// Writes the episode under save_dir/session-NNN and starts a new one.
  std::filesystem::path save();
  /// Drops the recording and restarts from the start pose.
  void discard();

 private:
  void restart();

  SessionConfig cfg_;
  World world_;
  ActionSpaceConfig action_space_;
  Perspective perspective_;
  Pose start_;
  std::vector<ActionVector> actions_;
  std::vector<Pose> agent_;
  std::vector<Frame> frames_;
};

}  // namespace wmbench
