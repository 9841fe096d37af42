#pragma once

// Action vocabulary and per-frame pose kinematics.
//
// World frame: x east, y north, z up. Yaw is measured clockwise from +y
// (north) in degrees, so YawRight increases yaw. Pitch is positive looking
// up. The camera-local frame is (right, down, forward), in which forward is
// [0, 0, 1].
//
// One frame of kinematics is rotate-then-translate: yaw and pitch move by
// +/- delta_r for every held rotation key, then every held movement key adds
// delta_p along its horizontal direction under the *new* yaw. Pitch never
// tilts translation and z is never changed by movement keys.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmbench {

enum class ActionPrimitive : std::uint8_t {
  W = 0,
  A = 1,
  S = 2,
  D = 3,
  PitchUp = 4,
  PitchDown = 5,
  YawLeft = 6,
  YawRight = 7,
};

inline constexpr std::array<ActionPrimitive, 8> kAllPrimitives = {
    ActionPrimitive::W,       ActionPrimitive::A,         ActionPrimitive::S,
    ActionPrimitive::D,       ActionPrimitive::PitchUp,   ActionPrimitive::PitchDown,
    ActionPrimitive::YawLeft, ActionPrimitive::YawRight,
};

ActionPrimitive inverse(ActionPrimitive p);
std::string_view name(ActionPrimitive p);
std::optional<ActionPrimitive> primitive_from_name(std::string_view text);

/// Set of keys held during one frame. Wire form is one byte with
/// bit i set for ActionPrimitive value i (W,A,S,D,PitchUp,PitchDown,YawLeft,YawRight).
class ActionVector {
 public:
  constexpr ActionVector() = default;
  constexpr explicit ActionVector(std::uint8_t mask) : mask_(mask) {}
  ActionVector(std::initializer_list<ActionPrimitive> held);

  static ActionVector from_mask(std::uint8_t mask) { return ActionVector(mask); }
  constexpr std::uint8_t mask() const { return mask_; }

  constexpr bool empty() const { return mask_ == 0; }
  constexpr bool has(ActionPrimitive p) const {
    return (mask_ >> static_cast<unsigned>(p)) & 1u;
  }
  ActionVector with(ActionPrimitive p) const;
  ActionVector without(ActionPrimitive p) const;
  int count() const;

  /// True if the frame holds both a movement and a rotation key.
  bool mixes_rotation_and_translation() const;

  /// Text form: held primitive names sorted lexicographically and joined
  /// with '+'; the empty vector is "-".
  std::string to_text() const;
  static ActionVector parse(std::string_view text);

  friend constexpr bool operator==(ActionVector, ActionVector) = default;

 private:
  std::uint8_t mask_ = 0;
};

ActionVector inverse(ActionVector v);

/// Step sizes for one action space.
struct ActionSpaceConfig {
  std::string name;
  double delta_p = 150.0;  ///< world units per frame
  double delta_r = 0.7;    ///< degrees per frame

  void validate() const;
  friend bool operator==(const ActionSpaceConfig&, const ActionSpaceConfig&) = default;
};

/// The five named step-size combinations, in increasing order.
const std::vector<ActionSpaceConfig>& presets();
ActionSpaceConfig preset(std::string_view name);
std::vector<std::string> preset_names();

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline constexpr double kPitchLimit = 89.0;

struct Pose {
  Vec3 position;
  double yaw = 0.0;    ///< degrees, [0, 360)
  double pitch = 0.0;  ///< degrees, [-89, 89]

  /// Returns a copy with yaw wrapped and pitch clamped.
  Pose normalized() const;
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Unit horizontal forward and right vectors for a yaw.
Vec3 forward_dir(double yaw_deg);
Vec3 right_dir(double yaw_deg);

Pose step_pose(const Pose& pose, ActionVector action, const ActionSpaceConfig& cfg);

/// pose[i] = step_pose(pose[i-1], actions[i]) with pose[-1] = start; the
/// start pose itself is not included.
std::vector<Pose> apply_sequence(const Pose& start, std::span<const ActionVector> actions,
                                 const ActionSpaceConfig& cfg);

/// Element-wise inverse in reversed order; the "undo" of a sequence.
std::vector<ActionVector> reversed_inverse(std::span<const ActionVector> actions);

/// Position distance and angular distances between two poses.
struct PoseDelta {
  double position = 0.0;
  double yaw = 0.0;
  double pitch = 0.0;
  bool within(double tol) const { return position <= tol && yaw <= tol && pitch <= tol; }
};
PoseDelta pose_distance(const Pose& a, const Pose& b);

}  // namespace wmbench
