#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "support.hpp"
#include "wmbench/error.hpp"
#include "wmbench/harness/dataset.hpp"
#include "wmbench/trajectory.hpp"

namespace wmbench {
namespace {

namespace fs = std::filesystem;

DatasetConfig tiny_config(std::uint64_t seed) {
  DatasetConfig c;
  c.seed = seed;
  c.resolution = {32, 24};
  return c;
}

TEST(Dataset, DefaultDeskCounts) {
  testing::TempDir dir;
  const DatasetManifest m = gen_dataset(tiny_config(3), dir.path());
  EXPECT_EQ(m.select(suite::kShared).size(), 16u);
  EXPECT_EQ(m.select(suite::kGeneralization).size(), 10u);
  EXPECT_EQ(m.select(suite::kMirror).size(), 10u);
  EXPECT_TRUE(categories_balanced(m));

  std::set<std::string> ids;
  std::set<int> mirror_paths;
  for (const auto& e : m.episodes) {
    EXPECT_TRUE(ids.insert(e.id).second) << e.id;
    EXPECT_TRUE(fs::exists(dir.path() / e.path / "meta.json")) << e.id;
    if (e.suite == suite::kMirror) {
      mirror_paths.insert(e.mirror_path);
      EXPECT_EQ(e.perspective, Perspective::FirstPerson);
    }
    if (e.suite == suite::kShared) EXPECT_EQ(e.preset, "mid");
  }
  EXPECT_EQ(mirror_paths.size(), 10u);
  EXPECT_EQ(read_manifest(dir.path()), m);
  EXPECT_EQ(read_manifest(dir / "manifest.json"), m);
}

TEST(Dataset, SharedEpisodesAreRevisitLoops) {
  testing::TempDir dir;
  DatasetConfig c = tiny_config(4);
  c.generalization_suite = false;
  c.mirror_suite = false;
  c.shared_test_per_perspective = 2;
  const DatasetManifest m = gen_dataset(c, dir.path());
  for (const auto& e : m.episodes) {
    const Episode ep = read_episode(dir.path() / e.path);
    EXPECT_EQ(ep.memory_len, 48);
    EXPECT_EQ(ep.predict_len, 96);
    // the stored loop runs one frame past T+k, back onto frame 0
    EXPECT_EQ(ep.frame_count(), 145u);
    EXPECT_TRUE(mirrors(ep.agent_poses())) << e.id;
    EXPECT_TRUE(ep.frames.front().same_pixels(ep.frames.back())) << e.id;
  }
}

TEST(Dataset, MirrorProbeLayout) {
  testing::TempDir dir;
  DatasetConfig c = tiny_config(5);
  c.shared_suite = false;
  c.generalization_suite = false;
  const DatasetManifest m = gen_dataset(c, dir.path());
  for (const auto& e : m.episodes) {
    const Episode ep = read_episode(dir.path() / e.path, {false, false});
    EXPECT_EQ(ep.predict_len, 2 * e.mirror_leg);
    const auto& poses = ep.agent_poses();
    // the preamble returns to the start pose before the probe begins
    EXPECT_TRUE(pose_distance(poses[std::size_t(ep.memory_len - 1)], poses[0]).within(1e-9));
    const std::span<const Pose> probe(poses.data() + ep.memory_len - 1, std::size_t(2 * e.mirror_leg + 1));
    EXPECT_TRUE(mirrors(probe)) << e.id;
  }
}

TEST(Dataset, SameSeedIdenticalTrees) {
  testing::TempDir a, b;
  DatasetConfig c = tiny_config(7);
  c.shared_test_per_perspective = 2;
  c.generalization_presets = {"small", "large"};
  gen_dataset(c, a.path());
  c.jobs = 3;  // thread count must not matter
  gen_dataset(c, b.path());
  EXPECT_EQ(testing::tree_digest(a.path()), testing::tree_digest(b.path()));
}

TEST(Dataset, DifferentSeedDifferentWorlds) {
  testing::TempDir a, b;
  DatasetConfig c = tiny_config(1);
  c.generalization_suite = c.mirror_suite = false;
  c.shared_test_per_perspective = 1;
  const auto ma = gen_dataset(c, a.path());
  c.seed = 2;
  const auto mb = gen_dataset(c, b.path());
  EXPECT_NE(ma.episodes[0].world_seed, mb.episodes[0].world_seed);
}

TEST(Dataset, RefusesNonEmptyDirectoryWithoutOverwrite) {
  testing::TempDir dir;
  DatasetConfig c = tiny_config(1);
  c.generalization_suite = c.mirror_suite = false;
  c.shared_test_per_perspective = 1;
  { std::ofstream(dir / "stray.txt") << "x"; }
  EXPECT_THROW(gen_dataset(c, dir.path()), ConfigError);
  EXPECT_NO_THROW(gen_dataset(c, dir.path(), true));
  EXPECT_TRUE(fs::exists(dir / "stray.txt"));
}

TEST(Dataset, ConfigValidation) {
  DatasetConfig c = tiny_config(1);
  c.memory_len = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(1);
  c.shared_preset = "gigantic";
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(1);
  c.perspectives.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config(1);
  c.shared_suite = c.generalization_suite = c.mirror_suite = false;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Dataset, TrainSplitKeepsBalance) {
  testing::TempDir dir;
  DatasetConfig c = tiny_config(8);
  c.generalization_suite = c.mirror_suite = false;
  c.perspectives = {Perspective::ThirdPerson};
  c.shared_test_per_perspective = 3;
  c.shared_train_per_perspective = 2;
  c.categories = {SceneCategory::Urban, SceneCategory::Interior};
  c.memory_len = 24;
  c.predict_len = 120;
  const DatasetManifest m = gen_dataset(c, dir.path());
  EXPECT_EQ(m.episodes.size(), 5u);
  EXPECT_TRUE(categories_balanced(m, c.categories));
  EXPECT_FALSE(categories_balanced(m));  // six categories are missing entirely
}

TEST(Manifest, MalformedFilesAreFormatErrors) {
  testing::TempDir dir;
  EXPECT_THROW(read_manifest(dir.path()), FormatError);
  { std::ofstream(dir / "manifest.json") << "{not json"; }
  EXPECT_THROW(read_manifest(dir.path()), FormatError);
  { std::ofstream(dir / "manifest.json") << R"({"format_version": 99})"; }
  EXPECT_THROW(read_manifest(dir.path()), FormatError);
}

TEST(MirrorEpisodeActions, PreambleThenLegs) {
  const auto acts = mirror_episode_actions(5, 48);
  const auto path = gen_mirror_paths()[4];
  ASSERT_EQ(acts.size(), 47u + 48u);
  const auto poses = apply_sequence(Pose{}, std::span(acts).first(47), preset("mid"));
  EXPECT_TRUE(pose_distance(poses.back(), Pose{}).within(1e-9));
  EXPECT_TRUE(std::equal(path.forward_actions.begin(), path.forward_actions.end(), acts.begin() + 47));
  EXPECT_THROW(mirror_episode_actions(11, 48), ConfigError);
}

}  // namespace
}  // namespace wmbench
