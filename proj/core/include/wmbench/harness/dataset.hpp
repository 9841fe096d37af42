#pragma once

// Desk-scale benchmark datasets: shared-action and action-space
// generalization suites over procedural worlds, plus mirror-path probes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wmbench/action_space.hpp"
#include "wmbench/frame.hpp"
#include "wmbench/world_sim.hpp"

namespace wmbench {

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr int kManifestFormatVersion = 1;

namespace suite {
inline constexpr const char* kShared = "shared-action";
inline constexpr const char* kGeneralization = "generalization";
inline constexpr const char* kMirror = "mirror";
}  // namespace suite

struct ManifestEntry {
  std::string id;
  std::string path;  ///< relative to the dataset root
  Perspective perspective = Perspective::FirstPerson;
  std::string preset;
  std::string suite;
  std::string split;  ///< train | test
  SceneCategory category = SceneCategory::Landscape;
  std::uint64_t world_seed = 0;
  int mirror_path = 0;  ///< 1..10 for mirror probes
  int mirror_leg = 0;   ///< forward leg length F; the probe predicts 2F frames

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::string toolkit_version = kToolkitVersion;
  Resolution resolution;
  int memory_len = 48;
  int predict_len = 96;
  std::string shared_preset;
  std::vector<ManifestEntry> episodes;

  std::vector<const ManifestEntry*> select(const std::string& suite_tag) const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct DatasetConfig {
  std::uint64_t seed = 0;
  Resolution resolution;
  int memory_len = 48;
  int predict_len = 96;
  int loop_segments = 3;  ///< 24-frame runs before the loop turns back
  double extent = 24000.0;
  std::vector<Perspective> perspectives{Perspective::FirstPerson, Perspective::ThirdPerson};
  std::vector<SceneCategory> categories{kAllCategories.begin(), kAllCategories.end()};

  bool shared_suite = true;
  std::string shared_preset = "mid";
  int shared_test_per_perspective = 8;
  int shared_train_per_perspective = 0;

  bool generalization_suite = true;
  std::vector<std::string> generalization_presets = preset_names();
  int generalization_per_preset = 1;  ///< per perspective

  bool mirror_suite = true;
  std::vector<Perspective> mirror_perspectives{Perspective::FirstPerson};

  unsigned jobs = 1;

  void validate() const;
};

/// Generates every episode and writes `manifest.json` under `out_dir`.
/// Refuses a non-empty directory unless `overwrite` is set, in which case
/// only `manifest.json` and `episodes/` are replaced.
DatasetManifest gen_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir,
                            bool overwrite = false);

/// Accepts the dataset root or the manifest file itself.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);
std::filesystem::path manifest_root(const std::filesystem::path& path);

/// True when every (perspective, split) cell holds each of `categories`
/// within one episode of every other, and nothing else.
bool categories_balanced(const DatasetManifest& manifest,
                         std::span<const SceneCategory> categories = kAllCategories);

/// Action sequence of a mirror probe episode: a look-around preamble of
/// T-1 actions that returns to the start pose, then the forward leg and its
/// reversed inverse.
std::vector<ActionVector> mirror_episode_actions(int path_id, int memory_len);

}  // namespace wmbench
