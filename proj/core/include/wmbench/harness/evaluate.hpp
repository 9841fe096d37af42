#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wmbench/harness/adapter.hpp"
#include "wmbench/harness/dataset.hpp"
#include "wmbench/metrics.hpp"

namespace wmbench {

struct EvalConfig {
  unsigned jobs = 1;
  /// Directory of `<episode id>.tum` camera trajectories for pixel-only
  /// models. These, and any trajectory returned by an external adapter, are
  /// Sim(3)-aligned to ground truth before RPE.
  std::optional<std::filesystem::path> poses_dir;
  std::vector<std::string> suites;  ///< empty selects every suite
  int rpe_delta = 1;
  bool verify_frames = false;  ///< re-render ground truth while loading episodes
};

struct EpisodeFailure {
  std::string episode;
  std::string stage;  ///< load | model | metrics | rpe
  std::string kind;   ///< adapter error kind, or "integrity", "format", "error", "missing-trajectory"
  std::string message;
  friend bool operator==(const EpisodeFailure&, const EpisodeFailure&) = default;
};

struct EvaluationReport {
  std::string model;
  std::string mode;
  std::string context_policy;
  std::uint64_t dataset_seed = 0;
  std::vector<MetricReport> perspectives;  ///< one per perspective with completed episodes
  std::vector<EpisodeResult> episodes;
  std::vector<EpisodeFailure> failures;

  const MetricReport* perspective(const std::string& name) const;
};

/// Runs every selected manifest episode through the adapter and aggregates
/// per perspective. Per-episode failures are recorded and skipped; throws
/// Error when no episode completes.
EvaluationReport evaluate(const DatasetManifest& manifest, const std::filesystem::path& root,
                          ModelAdapter& adapter, const EvalConfig& cfg = {});

struct MirrorScore {
  double gsc = 0.0;
  Prediction forward;
  Prediction reverse;
};

/// Mirror-probe protocol: the model predicts the forward leg from the memory
/// segment, then the reverse leg with its own forward output appended to the
/// context (only the last forward frame for memoryless models). Frames are
/// paired at equal ground-truth poses.
MirrorScore score_mirror_probe(ModelAdapter& adapter, const Episode& episode, int leg,
                               const std::string& episode_id, const World* world);

}  // namespace wmbench
