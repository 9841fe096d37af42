#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "support.hpp"
#include "wmbench/error.hpp"
#include "wmbench/world_sim.hpp"

namespace wmbench {
namespace {

using testing::empty_world;
using testing::make_box;

constexpr Resolution kSmall{64, 48};

TEST(BuildWorld, Deterministic) {
  const WorldSpec spec{7, SceneCategory::Urban, 5000.0};
  EXPECT_EQ(build_world(spec), build_world(spec));
}

TEST(BuildWorld, SeedChangesLayout) {
  const World a = build_world({7, SceneCategory::Urban, 5000.0});
  const World b = build_world({8, SceneCategory::Urban, 5000.0});
  EXPECT_NE(a.landmarks, b.landmarks);
}

TEST(BuildWorld, LandmarkConstraints) {
  for (auto cat : kAllCategories) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const World w = build_world({seed, cat, 24000.0});
      ASSERT_GE(w.landmarks.size(), std::size_t(kMinLandmarks)) << name(cat);
      std::set<int> ids;
      for (const auto& lm : w.landmarks) ids.insert(lm.color_id);
      EXPECT_EQ(ids.size(), w.landmarks.size()) << "duplicate colour ids in " << name(cat);
      for (std::size_t i = 0; i < w.landmarks.size(); ++i) {
        for (std::size_t j = i + 1; j < w.landmarks.size(); ++j) {
          EXPECT_FALSE(w.landmarks[i].box.overlaps_xy(w.landmarks[j].box, 0.0));
        }
      }
      // start pose is clear
      const Pose s = start_pose(w);
      for (const auto& lm : w.landmarks) EXPECT_FALSE(lm.box.contains_strict(s.position));
    }
  }
}

TEST(BuildWorld, RejectsBadExtent) {
  EXPECT_THROW(build_world({1, SceneCategory::Landscape, 0.0}), ConfigError);
  EXPECT_THROW(build_world({1, SceneCategory::Landscape, 10.0}), ConfigError);
}

TEST(Categories, NameRoundTrip) {
  for (auto c : kAllCategories) EXPECT_EQ(category_from_name(name(c)), c);
  EXPECT_THROW(category_from_name("volcanic"), ConfigError);
}

TEST(Render, Deterministic) {
  const World w = build_world({3, SceneCategory::Scifi, 24000.0});
  const Pose p = start_pose(w, 40.0);
  EXPECT_EQ(render(w, p, kSmall).pixels, render(w, p, kSmall).pixels);
}

TEST(Render, ToneRange) {
  const World w = build_world({4, SceneCategory::Aquatic, 24000.0});
  for (double yaw : {0.0, 90.0, 180.0, 270.0}) {
    Pose p = start_pose(w, yaw);
    p.pitch = yaw == 90.0 ? 60.0 : (yaw == 270.0 ? -60.0 : 0.0);
    for (auto persp : {Perspective::FirstPerson, Perspective::ThirdPerson}) {
      const Frame f = render_view(w, persp, p, kSmall);
      const auto [lo, hi] = std::minmax_element(f.pixels.begin(), f.pixels.end());
      EXPECT_GE(int(*lo), kToneMin);
      EXPECT_LE(int(*hi), kToneMax);
    }
  }
}

TEST(Render, FacingLandmarkFillsView) {
  World w = empty_world();
  w.landmarks.push_back(make_box(-2000, 400, 2000, 800, 3000, 3));
  Pose cam;
  cam.position = {0, 0, kEyeHeight};
  const RenderLayers l = render_layers(w, cam, kSmall);
  std::map<std::uint8_t, std::size_t> hist;
  for (auto id : l.surface) ++hist[id];
  const auto best = std::max_element(hist.begin(), hist.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
  EXPECT_EQ(best->first, kSurfaceLandmarkBase + 0);
  // centre ray hits the box front face at distance 400
  const std::size_t centre = std::size_t(kSmall.height / 2) * kSmall.width + kSmall.width / 2;
  EXPECT_EQ(l.surface[centre], kSurfaceLandmarkBase + 0);
}

TEST(Render, OppositeHeadingsDiffer) {
  World w = empty_world();
  w.landmarks.push_back(make_box(-300, 500, 300, 900, 800, 1));
  w.landmarks.push_back(make_box(-2000, -3000, 2000, -2500, 3000, 2));
  const Pose fore = start_pose(w, 0.0);
  const Pose aft = start_pose(w, 180.0);
  EXPECT_NE(render(w, fore, kSmall).pixels, render(w, aft, kSmall).pixels);
}

TEST(Render, RejectsBadResolution) {
  const World w = empty_world();
  EXPECT_THROW(render(w, Pose{}, {0, 10}), ConfigError);
}

TEST(BoomCamera, FullLengthInOpenSpace) {
  const World w = empty_world();
  Pose ch = start_pose(w, 30.0);
  const BoomCamera b = boom_camera(ch, w);
  EXPECT_DOUBLE_EQ(b.length, kBoomLength);
  EXPECT_NEAR(b.camera.pitch, ch.pitch - kBoomPitch, 1e-12);
  EXPECT_EQ(boom_camera(ch, w).camera, b.camera);
}

TEST(BoomCamera, ShortensAgainstWall) {
  World w = empty_world();
  // wall just behind the character (which faces +y)
  w.landmarks.push_back(make_box(-1000, -250, 1000, -150, 4000, 1));
  const Pose ch = start_pose(w, 0.0);
  const BoomCamera b = boom_camera(ch, w);
  EXPECT_LT(b.length, kBoomLength);
  EXPECT_FALSE(w.landmarks[0].box.contains_strict(b.camera.position));
}

TEST(ThirdPerson, AvatarVisibleInOpenSpace) {
  const World w = build_world({11, SceneCategory::Stylized, 24000.0});
  for (double yaw : {0.0, 77.0, 200.0}) {
    const auto l = render_third_person_layers(w, start_pose(w, yaw), kSmall);
    EXPECT_GT(l.count(kSurfaceAvatar), 0u);
  }
  const auto fp = render_layers(w, start_pose(w), kSmall);
  EXPECT_EQ(fp.count(kSurfaceAvatar), 0u);
}

TEST(ThirdPerson, OccluderHidesPartOfAvatar) {
  World open = empty_world();
  const Pose ch = start_pose(open, 0.0);
  const auto full = render_third_person_layers(open, ch, {128, 96}).count(kSurfaceAvatar);

  // A thin pillar halfway along the boom, topped just under the boom ray so
  // the camera keeps its length but loses sight of the lower body.
  World blocked = open;
  const BoomCamera b = boom_camera(ch, open);
  const double mid_y = (b.camera.position.y + ch.position.y) / 2.0;
  const double top = (b.camera.position.z + ch.position.z) / 2.0 - 20.0;
  blocked.landmarks.push_back(make_box(-8, mid_y - 4, 40, mid_y + 4, top, 1));
  const auto cam2 = boom_camera(ch, blocked);
  const auto part = render_third_person_layers(blocked, ch, {128, 96}).count(kSurfaceAvatar);
  EXPECT_GT(full, 0u);
  EXPECT_EQ(cam2.length, b.length);
  EXPECT_LT(part, full);
}

TEST(Collision, OpenSpacePassesThrough) {
  const World w = empty_world();
  const Vec3 from{0, 0, kEyeHeight}, to{100, 50, kEyeHeight};
  EXPECT_EQ(resolve_collision(w, from, to), to);
  EXPECT_EQ(resolve_collision(w, from, from), from);
}

TEST(Collision, StopsOutsideBox) {
  World w = empty_world();
  w.landmarks.push_back(make_box(-100, 200, 100, 400, 500, 0));
  const Vec3 from{0, 0, kEyeHeight}, to{0, 300, kEyeHeight};
  const Vec3 got = resolve_collision(w, from, to);
  EXPECT_FALSE(w.landmarks[0].box.contains_strict(got));
  // analytic entry point is y = 200
  EXPECT_NEAR(got.y, 200.0, 0.01);
  EXPECT_LE(got.y, 200.0);
  EXPECT_EQ(got.x, 0.0);
}

TEST(Collision, WorldBoundary) {
  const World w = empty_world();
  const double e = w.spec.extent;
  const Vec3 got = resolve_collision(w, {e - 10, 0, kEyeHeight}, {e + 50, 0, kEyeHeight});
  EXPECT_TRUE(w.in_bounds(got));
  EXPECT_NEAR(got.x, e, 0.01);
}

TEST(Simulate, ReturnsStartPlusOnePosePerAction) {
  const World w = build_world({2, SceneCategory::Ancient, 24000.0});
  const std::vector<ActionVector> acts(10, ActionVector{ActionPrimitive::W});
  const auto poses = simulate(w, start_pose(w), acts, preset("mid"));
  ASSERT_EQ(poses.size(), 11u);
  EXPECT_EQ(poses.front(), start_pose(w));
}

}  // namespace
}  // namespace wmbench
