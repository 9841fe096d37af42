#pragma once

// Seeded procedural worlds and a deterministic software raycaster.
//
// A world is a gently rolling heightfield plus a set of axis-aligned,
// non-overlapping coloured boxes ("landmarks"). Worlds are static: the
// frame index passed to the renderer is metadata only.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmbench/action_space.hpp"
#include "wmbench/frame.hpp"

namespace wmbench {

enum class SceneCategory : std::uint8_t {
  Landscape,
  Scifi,
  Stylized,
  Ancient,
  Urban,
  Industrial,
  Interior,
  Aquatic,
};

inline constexpr std::array<SceneCategory, 8> kAllCategories = {
    SceneCategory::Landscape, SceneCategory::Scifi,      SceneCategory::Stylized,
    SceneCategory::Ancient,   SceneCategory::Urban,      SceneCategory::Industrial,
    SceneCategory::Interior,  SceneCategory::Aquatic,
};

std::string_view name(SceneCategory c);
SceneCategory category_from_name(std::string_view text);

enum class Perspective : std::uint8_t { FirstPerson, ThirdPerson };
std::string_view name(Perspective p);
Perspective perspective_from_name(std::string_view text);

struct WorldSpec {
  std::uint64_t seed = 0;
  SceneCategory category = SceneCategory::Landscape;
  double extent = 24000.0;  ///< half-width of the square playable area

  friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Aabb {
  Vec3 min;
  Vec3 max;
  bool contains_strict(const Vec3& p) const {
    return p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y && p.z > min.z &&
           p.z < max.z;
  }
  bool overlaps_xy(const Aabb& o, double gap) const {
    return min.x - gap < o.max.x && o.min.x - gap < max.x && min.y - gap < o.max.y &&
           o.min.y - gap < max.y;
  }
  friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct Landmark {
  Aabb box;
  int color_id = 0;
  Rgb color;
  friend bool operator==(const Landmark&, const Landmark&) = default;
};

struct Heightfield {
  int nx = 0;
  int ny = 0;
  double cell = 1000.0;
  double origin_x = 0.0;  ///< world x of grid column 0
  double origin_y = 0.0;
  std::vector<double> heights;  ///< row-major, ny rows of nx samples
  double min_height = 0.0;
  double max_height = 0.0;

  /// Bilinear height, clamped to the border outside the grid.
  double height_at(double x, double y) const;
  /// Largest |dh| / horizontal distance between neighbouring samples.
  double max_slope() const;
  friend bool operator==(const Heightfield&, const Heightfield&) = default;
};

struct Palette {
  Rgb sky_top;
  Rgb sky_horizon;
  Rgb ground_a;
  Rgb ground_b;
  friend bool operator==(const Palette&, const Palette&) = default;
};

struct World {
  WorldSpec spec;
  Heightfield terrain;
  std::vector<Landmark> landmarks;
  Palette palette;

  bool in_bounds(const Vec3& p) const {
    return p.x >= -spec.extent && p.x <= spec.extent && p.y >= -spec.extent &&
           p.y <= spec.extent;
  }
  friend bool operator==(const World&, const World&) = default;
};

inline constexpr double kEyeHeight = 170.0;
inline constexpr int kMinLandmarks = 12;

/// Avatar colours (upper/lower body) used by the third-person renderer.
inline constexpr Rgb kAvatarUpper{196, 60, 60};
inline constexpr Rgb kAvatarLower{60, 60, 160};

/// Every rendered channel value lies in [kToneMin, kToneMax]; this headroom
/// keeps additive-noise reference models unclipped.
inline constexpr int kToneMin = 48;
inline constexpr int kToneMax = 207;

World build_world(const WorldSpec& spec);

/// Default start pose: world origin at eye height (kept clear of landmarks).
Pose start_pose(const World& world, double yaw_deg = 0.0);

/// Per-pixel surface ids written alongside a frame.
enum SurfaceId : std::uint8_t {
  kSurfaceSky = 0,
  kSurfaceTerrain = 1,
  kSurfaceLandmarkBase = 2,  ///< landmark i is kSurfaceLandmarkBase + i
  kSurfaceAvatar = 255,
};

struct RenderLayers {
  Frame frame;
  std::vector<std::uint8_t> surface;  ///< one SurfaceId per pixel
  std::size_t count(std::uint8_t id) const;
};

/// First-person render from `camera`. 90 degree horizontal field of view.
Frame render(const World& world, const Pose& camera, Resolution res, int frame_index = 0);
RenderLayers render_layers(const World& world, const Pose& camera, Resolution res,
                           int frame_index = 0);

inline constexpr double kBoomLength = 420.0;
inline constexpr double kBoomPitch = 18.0;  ///< degrees below the character's pitch
inline constexpr double kBoomMargin = 20.0;

struct BoomCamera {
  Pose camera;
  double length = 0.0;
};

/// Camera on a boom behind/above the character, looking at its head point
/// (the character pose position). The boom is shortened when geometry,
/// terrain, or the world boundary would otherwise occlude it.
BoomCamera boom_camera(const Pose& character, const World& world);
Pose third_person_camera(const Pose& character, const World& world);

Frame render_third_person(const World& world, const Pose& character, Resolution res,
                          int frame_index = 0);
RenderLayers render_third_person_layers(const World& world, const Pose& character,
                                        Resolution res, int frame_index = 0);

/// Renders the view for a perspective. `agent` is the camera pose for first
/// person and the character pose for third person.
Frame render_view(const World& world, Perspective perspective, const Pose& agent, Resolution res,
                  int frame_index = 0);

/// Moves from `from` towards `to`, stopping just short of the first landmark
/// box or world boundary on the way (no sliding).
Vec3 resolve_collision(const World& world, const Vec3& from, const Vec3& to);

/// One simulated frame: kinematics then collision.
Pose step_in_world(const World& world, const Pose& pose, ActionVector action,
                   const ActionSpaceConfig& cfg);

/// Returns N+1 poses starting with `start`.
std::vector<Pose> simulate(const World& world, const Pose& start,
                           std::span<const ActionVector> actions, const ActionSpaceConfig& cfg);

}  // namespace wmbench
