#include "wmbench/harness/reference_models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>

namespace wmbench {

namespace {

double parse_param(const std::string& text, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || value.empty() || !std::isfinite(v) || v < 0.0) {
    throw ConfigError("bad reference model parameter in '" + text + "'");
  }
  return v;
}

std::string format_param(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

template <typename T>
void append_bytes(std::string& key, const T& v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  key.append(buf, sizeof(T));
}

}  // namespace

ReferenceSpec ReferenceSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  const bool has_arg = colon != std::string::npos;
  ReferenceSpec s;
  if (kind == "oracle" || kind == "frozen") {
    if (has_arg) throw ConfigError("reference model '" + kind + "' takes no parameter");
    s.kind = kind == "oracle" ? ReferenceKind::Oracle : ReferenceKind::Frozen;
  } else if (kind == "noisy") {
    s.kind = ReferenceKind::Noisy;
    s.sigma = parse_param(text, arg);
  } else if (kind == "drift") {
    s.kind = ReferenceKind::Drift;
    s.epsilon = parse_param(text, arg);
  } else if (kind == "mismatch" || kind == "preset-mismatch") {
    s.kind = ReferenceKind::PresetMismatch;
    s.assumed_preset = preset(arg).name;
  } else {
    throw ConfigError("unknown reference model '" + text +
                      "' (expected oracle, frozen, noisy:<sigma>, drift:<eps>, mismatch:<preset>)");
  }
  return s;
}

std::string ReferenceSpec::to_string() const {
  switch (kind) {
    case ReferenceKind::Oracle: return "oracle";
    case ReferenceKind::Frozen: return "frozen";
    case ReferenceKind::Noisy: return "noisy:" + format_param(sigma);
    case ReferenceKind::Drift: return "drift:" + format_param(epsilon);
    case ReferenceKind::PresetMismatch: return "mismatch:" + assumed_preset;
  }
  return "oracle";
}

Frame FrameCache::get_or_render(const World& world, Perspective perspective, const Pose& agent,
                                Resolution res, int frame_index) {
  std::string key;
  append_bytes(key, world.spec.seed);
  append_bytes(key, world.spec.category);
  append_bytes(key, world.spec.extent);
  append_bytes(key, perspective);
  append_bytes(key, agent.position.x);
  append_bytes(key, agent.position.y);
  append_bytes(key, agent.position.z);
  append_bytes(key, agent.yaw);
  append_bytes(key, agent.pitch);
  append_bytes(key, res.width);
  append_bytes(key, res.height);
  {
    std::lock_guard lock(mu_);
    auto it = frames_.find(key);
    if (it != frames_.end()) {
      Frame f = it->second;
      f.frame_index = frame_index;
      return f;
    }
  }
  Frame f = render_view(world, perspective, agent, res, frame_index);
  std::lock_guard lock(mu_);
  if (frames_.size() >= max_entries_) frames_.clear();
  frames_.emplace(std::move(key), f);
  return f;
}

std::size_t FrameCache::size() const {
  std::lock_guard lock(mu_);
  return frames_.size();
}

Frame add_uniform_noise(const Frame& f, double sigma, Rng& rng) {
  Frame out = f;
  const double half_width = sigma * std::sqrt(3.0) * 255.0;
  for (auto& c : out.pixels) {
    const double v = std::floor(double(c) + rng.uniform(-half_width, half_width) + 0.5);
    c = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

ReferenceModel::ReferenceModel(ReferenceSpec spec, std::uint64_t seed, ContextPolicy policy,
                               std::shared_ptr<FrameCache> cache)
    : spec_(std::move(spec)), seed_(seed), policy_(policy), cache_(std::move(cache)) {}

Frame ReferenceModel::render(const World& world, Perspective p, const Pose& agent, Resolution res,
                             int index) const {
  if (cache_) return cache_->get_or_render(world, p, agent, res, index);
  return render_view(world, p, agent, res, index);
}

Prediction ReferenceModel::predict(const PredictionRequest& req) {
  Prediction out;
  if (spec_.kind == ReferenceKind::Frozen) {
    out.frames.assign(std::size_t(req.k), req.context.back());
    for (std::size_t i = 0; i < out.frames.size(); ++i) {
      out.frames[i].frame_index = int(req.first_frame_index + i);
    }
    if (req.hint) {
      const std::vector<Pose> still(std::size_t(req.k), req.hint->anchor);
      out.agent_poses = still;
      std::vector<Pose> agents(std::size_t(req.k) + 1, req.hint->anchor);
      out.trajectory = to_trajectory(camera_poses_for(*req.hint->world, req.hint->perspective, agents),
                                     req.fps, req.first_frame_index - 1);
    }
    return out;
  }
  if (!req.hint || !req.hint->world) {
    throw ConfigError("reference model '" + label() + "' needs simulator access");
  }
  const OracleHint& h = *req.hint;
  const World& world = *h.world;
  const ActionSpaceConfig cfg =
      spec_.kind == ReferenceKind::PresetMismatch ? preset(spec_.assumed_preset) : h.cfg;

  std::vector<Pose> agents = simulate(world, h.anchor, req.actions, cfg);
  if (spec_.kind == ReferenceKind::Drift) {
    for (std::size_t i = 1; i < agents.size(); ++i) agents[i].position.x += double(i) * spec_.epsilon;
  }
  const std::size_t k = std::size_t(req.k);
  out.frames.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const int index = int(req.first_frame_index + i);
    Frame f = render(world, h.perspective, agents[i + 1], req.resolution, index);
    if (spec_.kind == ReferenceKind::Noisy) {
      Rng rng(derive_seed(derive_seed(seed_, hash_string(req.episode_id)), std::uint64_t(index)));
      f = add_uniform_noise(f, spec_.sigma, rng);
    }
    out.frames[i] = std::move(f);
  }
  out.trajectory =
      to_trajectory(camera_poses_for(world, h.perspective, agents), req.fps, req.first_frame_index - 1);
  out.agent_poses = std::vector<Pose>(agents.begin() + 1, agents.end());
  return out;
}

std::unique_ptr<ReferenceModel> make_reference_model(const std::string& text, std::uint64_t seed,
                                                     ContextPolicy policy,
                                                     std::shared_ptr<FrameCache> cache) {
  return std::make_unique<ReferenceModel>(ReferenceSpec::parse(text), seed, policy, std::move(cache));
}

}  // namespace wmbench
