#pragma once

// Frame-space losses. Pixel values are normalized to [0, 1] before squaring,
// so every score is a mean squared error in that unit.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmbench/frame.hpp"

namespace wmbench {

namespace dim {
inline constexpr const char* kLcm = "lcm";
inline constexpr const char* kGsc = "gsc";
inline constexpr const char* kAsg = "asg";
inline constexpr const char* kRpeTrans = "rpe_trans";
inline constexpr const char* kRpeRot = "rpe_rot";
inline constexpr const char* kAesthetic = "aesthetic";
inline constexpr const char* kImaging = "imaging";
}  // namespace dim

/// Pairwise (cascade) summation with a fixed split order.
double pairwise_sum(std::span<const double> values);
double mean(std::span<const double> values);

/// Mean over all pixels and channels of ((a - b) / 255)^2. Exact integer
/// accumulation, so the result is symmetric and 0 iff the bytes match.
double mse_frames(const Frame& a, const Frame& b);

/// L_lcm: mean per-frame MSE between predictions and ground truth.
double long_context_memory(std::span<const Frame> pred, std::span<const Frame> gt);

/// L_gsc: pose-matched pairing fwd[i] <-> rev[k-1-i], averaged.
double generated_scene_consistency(std::span<const Frame> fwd, std::span<const Frame> rev);

/// Same quantity as long_context_memory, evaluated per action-space preset.
double action_space_generalization(std::span<const Frame> pred, std::span<const Frame> gt);

/// Averages per-preset asg scores (each a list of episode scores) into the
/// suite score: the mean over presets of each preset's episode mean.
double aggregate_generalization(const std::map<std::string, std::vector<double>>& per_preset);

struct EpisodeResult {
  std::string episode;
  std::string suite;   ///< shared-action | generalization | mirror
  std::string preset;  ///< action-space preset name
  std::string perspective;
  std::map<std::string, double> scores;
};

struct MetricReport {
  std::string model;
  std::string context_policy;
  std::string perspective;
  std::size_t episode_count = 0;
  std::map<std::string, double> scores;
  std::map<std::string, std::size_t> counts;  ///< episodes contributing per dimension
  std::map<std::string, double> asg_per_preset;

  std::optional<double> score(const std::string& dimension) const;
};

/// Unweighted mean per dimension across episodes. Within a suite every
/// episode must carry the same dimensions; asg is averaged per preset first.
/// Throws ConfigError on empty input, missing dimensions, or a non-finite or
/// negative score.
MetricReport aggregate_report(std::span<const EpisodeResult> results, const std::string& model = "",
                              const std::string& context_policy = "",
                              const std::string& perspective = "");

}  // namespace wmbench
