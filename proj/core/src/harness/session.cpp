#include "wmbench/harness/session.hpp"

#include <cstdio>

#include "wmbench/error.hpp"

namespace wmbench {

namespace fs = std::filesystem;

SessionCore::SessionCore(const SessionConfig& cfg)
    : cfg_(cfg),
      world_(build_world(cfg.world)),
      action_space_(preset(cfg.preset)),
      perspective_(cfg.perspective),
      start_(start_pose(world_)) {
  if (cfg.resolution.width <= 0 || cfg.resolution.height <= 0) {
    throw ConfigError("session resolution must be positive");
  }
  restart();
}

void SessionCore::restart() {
  actions_.clear();
  agent_.assign(1, start_);
  frames_.assign(1, render_view(world_, perspective_, start_, cfg_.resolution, 0));
}

const Frame& SessionCore::tick(ActionVector action) {
  const Pose next = step_in_world(world_, agent_.back(), action, action_space_);
  actions_.push_back(action);
  agent_.push_back(next);
  frames_.push_back(render_view(world_, perspective_, next, cfg_.resolution, int(frames_.size())));
  return frames_.back();
}

Episode SessionCore::to_episode() const {
  const std::size_t n = frames_.size();
  if (n < 2) throw ConfigError("a session needs at least one tick before it can be saved");
  Episode ep;
  ep.world = world_.spec;
  ep.cfg = action_space_;
  ep.perspective = perspective_;
  ep.resolution = cfg_.resolution;
  ep.fps = kFps;
  ep.actions = actions_;
  ep.camera_poses = camera_poses_for(world_, perspective_, agent_);
  if (perspective_ == Perspective::ThirdPerson) ep.character_poses = agent_;
  ep.frames = frames_;
  ep.memory_len = int((n + 2) / 3);
  ep.predict_len = int(n) - ep.memory_len;
  return ep;
}

fs::path SessionCore::save() {
  const Episode ep = to_episode();
  fs::create_directories(cfg_.save_dir);
  fs::path dir;
  for (int i = 0;; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "session-%03d", i);
    dir = cfg_.save_dir / buf;
    if (!fs::exists(dir)) break;
  }
  write_episode(ep, dir);
  restart();
  return dir;
}

void SessionCore::discard() { restart(); }

}  // namespace wmbench
