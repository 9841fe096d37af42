#include "wmbench/harness/adapter.hpp"

namespace wmbench {

std::string_view name(ContextPolicy p) {
  return p == ContextPolicy::WithMemory ? "with-memory" : "without-memory";
}

ContextPolicy context_policy_from_name(std::string_view text) {
  if (text == "with-memory") return ContextPolicy::WithMemory;
  if (text == "without-memory") return ContextPolicy::WithoutMemory;
  throw ConfigError("unknown context policy '" + std::string(text) +
                    "' (expected with-memory or without-memory)");
}

std::string_view name(AdapterErrorKind k) {
  switch (k) {
    case AdapterErrorKind::FrameCount: return "frame-count";
    case AdapterErrorKind::Resolution: return "resolution";
    case AdapterErrorKind::Timeout: return "timeout";
    case AdapterErrorKind::Protocol: return "protocol";
  }
  return "protocol";
}

void check_prediction(const Prediction& p, int k, Resolution res) {
  if (p.frames.size() != std::size_t(k)) {
    throw AdapterError(AdapterErrorKind::FrameCount, "expected " + std::to_string(k) +
                                                         " frames, got " + std::to_string(p.frames.size()));
  }
  for (std::size_t i = 0; i < p.frames.size(); ++i) {
    const Frame& f = p.frames[i];
    if (f.width != res.width || f.height != res.height || !f.valid()) {
      throw AdapterError(AdapterErrorKind::Resolution,
                         "frame " + std::to_string(i) + " is " + std::to_string(f.width) + "x" +
                             std::to_string(f.height) + ", expected " + std::to_string(res.width) +
                             "x" + std::to_string(res.height));
    }
  }
  if (p.agent_poses && p.agent_poses->size() != std::size_t(k)) {
    throw AdapterError(AdapterErrorKind::Protocol, "pose count does not match frame count");
  }
}

Prediction run_request(ModelAdapter& adapter, PredictionRequest request) {
  if (request.k < 1) throw ConfigError("prediction length must be >= 1");
  if (request.actions.size() != std::size_t(request.k)) {
    throw ConfigError("request carries " + std::to_string(request.actions.size()) +
                      " actions for k = " + std::to_string(request.k));
  }
  if (request.context.empty()) throw ConfigError("request has no context frames");
  request.policy = adapter.policy();
  if (request.policy == ContextPolicy::WithoutMemory && request.context.size() > 1) {
    request.context.erase(request.context.begin(), request.context.end() - 1);
  }
  if (!adapter.wants_hint()) request.hint.reset();
  Prediction p = adapter.predict(request);
  check_prediction(p, request.k, request.resolution);
  return p;
}

Prediction run_model(ModelAdapter& adapter, const Episode& episode, const std::string& episode_id,
                     const World* world) {
  if (episode.frames.size() != episode.frame_count()) {
    throw ConfigError("episode " + episode_id + " has no frames loaded");
  }
  const std::size_t T = std::size_t(episode.memory_len);
  PredictionRequest req;
  req.episode_id = episode_id;
  req.context.assign(episode.frames.begin(), episode.frames.begin() + long(T));
  const auto acts = episode.prediction_actions();
  req.actions.assign(acts.begin(), acts.end());
  req.k = episode.predict_len;
  req.resolution = episode.resolution;
  req.fps = episode.fps;
  req.first_frame_index = T;
  if (world) req.hint = OracleHint{world, episode.cfg, episode.perspective, episode.agent_poses()[T - 1]};
  return run_request(adapter, std::move(req));
}

}  // namespace wmbench
