#include "wmbench/action_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "wmbench/det_math.hpp"
#include "wmbench/error.hpp"

namespace wmbench {
namespace {

constexpr std::array<std::string_view, 8> kNames = {
    "W", "A", "S", "D", "PitchUp", "PitchDown", "YawLeft", "YawRight",
};

std::uint8_t bit(ActionPrimitive p) {
  return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p));
}

}  // namespace

ActionPrimitive inverse(ActionPrimitive p) {
  switch (p) {
    case ActionPrimitive::W: return ActionPrimitive::S;
    case ActionPrimitive::S: return ActionPrimitive::W;
    case ActionPrimitive::A: return ActionPrimitive::D;
    case ActionPrimitive::D: return ActionPrimitive::A;
    case ActionPrimitive::PitchUp: return ActionPrimitive::PitchDown;
    case ActionPrimitive::PitchDown: return ActionPrimitive::PitchUp;
    case ActionPrimitive::YawLeft: return ActionPrimitive::YawRight;
    case ActionPrimitive::YawRight: return ActionPrimitive::YawLeft;
  }
  return p;
}

std::string_view name(ActionPrimitive p) { return kNames[static_cast<std::size_t>(p)]; }

std::optional<ActionPrimitive> primitive_from_name(std::string_view text) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == text) return static_cast<ActionPrimitive>(i);
  }
  return std::nullopt;
}

ActionVector::ActionVector(std::initializer_list<ActionPrimitive> held) {
  for (auto p : held) mask_ |= bit(p);
}

ActionVector ActionVector::with(ActionPrimitive p) const {
  return ActionVector(static_cast<std::uint8_t>(mask_ | bit(p)));
}

ActionVector ActionVector::without(ActionPrimitive p) const {
  return ActionVector(static_cast<std::uint8_t>(mask_ & ~bit(p)));
}

int ActionVector::count() const { return std::popcount(mask_); }

bool ActionVector::mixes_rotation_and_translation() const {
  return (mask_ & 0x0F) != 0 && (mask_ & 0xF0) != 0;
}

std::string ActionVector::to_text() const {
  if (empty()) return "-";
  std::vector<std::string_view> held;
  for (auto p : kAllPrimitives) {
    if (has(p)) held.push_back(name(p));
  }
  std::sort(held.begin(), held.end());
  std::string out;
  for (std::size_t i = 0; i < held.size(); ++i) {
    if (i) out += '+';
    out += held[i];
  }
  return out;
}

ActionVector ActionVector::parse(std::string_view text) {
  if (text == "-") return ActionVector{};
  if (text.empty()) throw FormatError("empty action text (idle is written as '-')");
  ActionVector v;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('+', start), text.size());
    const auto token = text.substr(start, end - start);
    const auto p = primitive_from_name(token);
    if (!p) throw FormatError("unknown action primitive '" + std::string(token) + "'");
    v = v.with(*p);
    start = end + 1;
  }
  return v;
}

ActionVector inverse(ActionVector v) {
  ActionVector out;
  for (auto p : kAllPrimitives) {
    if (v.has(p)) out = out.with(inverse(p));
  }
  return out;
}

void ActionSpaceConfig::validate() const {
  if (!(delta_p > 0.0) || !std::isfinite(delta_p)) {
    throw ConfigError("action space '" + name + "': delta_p must be > 0");
  }
  if (!(delta_r > 0.0) || !(delta_r < 90.0)) {
    throw ConfigError("action space '" + name + "': delta_r must lie in (0, 90) degrees");
  }
}

const std::vector<ActionSpaceConfig>& presets() {
  // small / mid / large are the published combinations; midlarge and xlarge
  // extend the same monotone progression to five.
  static const std::vector<ActionSpaceConfig> kPresets = {
      {"small", 100.0, 0.4},
      {"mid", 150.0, 0.7},
      {"midlarge", 200.0, 1.0},
      {"large", 280.0, 1.4},
      {"xlarge", 400.0, 2.0},
  };
  return kPresets;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : presets()) names.push_back(p.name);
  return names;
}

ActionSpaceConfig preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::ostringstream msg;
  msg << "unknown action-space preset '" << name << "'; valid presets:";
  for (const auto& p : presets()) msg << ' ' << p.name;
  throw ConfigError(msg.str());
}

Pose Pose::normalized() const {
  Pose p = *this;
  p.yaw = detmath::wrap_degrees(p.yaw);
  p.pitch = std::clamp(p.pitch, -kPitchLimit, kPitchLimit);
  return p;
}

Vec3 forward_dir(double yaw_deg) {
  double s, c;
  detmath::sincos_deg(yaw_deg, s, c);
  return {s, c, 0.0};
}

Vec3 right_dir(double yaw_deg) {
  double s, c;
  detmath::sincos_deg(yaw_deg, s, c);
  return {c, -s + 0.0, 0.0};
}

Pose step_pose(const Pose& pose, ActionVector action, const ActionSpaceConfig& cfg) {
  if (action.empty()) return pose;
  using P = ActionPrimitive;
  Pose next = pose;

  const int yaw_dir = int(action.has(P::YawRight)) - int(action.has(P::YawLeft));
  const int pitch_dir = int(action.has(P::PitchUp)) - int(action.has(P::PitchDown));
  if (yaw_dir != 0) next.yaw = detmath::wrap_degrees(next.yaw + yaw_dir * cfg.delta_r);
  if (pitch_dir != 0) {
    next.pitch = std::clamp(next.pitch + pitch_dir * cfg.delta_r, -kPitchLimit, kPitchLimit);
  }

  const int fwd = int(action.has(P::W)) - int(action.has(P::S));
  const int side = int(action.has(P::D)) - int(action.has(P::A));
  if (fwd != 0 || side != 0) {
    double s, c;
    detmath::sincos_deg(next.yaw, s, c);
    // forward = (s, c, 0), right = (c, -s, 0)
    const double dx = fwd * s + side * c;
    const double dy = fwd * c - side * s;
    next.position.x += cfg.delta_p * dx;
    next.position.y += cfg.delta_p * dy;
  }
  return next;
}

std::vector<Pose> apply_sequence(const Pose& start, std::span<const ActionVector> actions,
                                 const ActionSpaceConfig& cfg) {
  std::vector<Pose> out;
  out.reserve(actions.size());
  Pose cur = start;
  for (auto a : actions) {
    cur = step_pose(cur, a, cfg);
    out.push_back(cur);
  }
  return out;
}

std::vector<ActionVector> reversed_inverse(std::span<const ActionVector> actions) {
  std::vector<ActionVector> out;
  out.reserve(actions.size());
  for (auto it = actions.rbegin(); it != actions.rend(); ++it) out.push_back(inverse(*it));
  return out;
}

PoseDelta pose_distance(const Pose& a, const Pose& b) {
  const double dx = a.position.x - b.position.x;
  const double dy = a.position.y - b.position.y;
  const double dz = a.position.z - b.position.z;
  return {std::sqrt(dx * dx + dy * dy + dz * dz),
          std::abs(detmath::angle_diff_deg(a.yaw, b.yaw)), std::abs(a.pitch - b.pitch)};
}

}  // namespace wmbench
