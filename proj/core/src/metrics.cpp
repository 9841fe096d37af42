#include "wmbench/metrics.hpp"

#include <cmath>
#include <set>

#include "wmbench/error.hpp"

namespace wmbench {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mean of an empty sequence");
  return pairwise_sum(values) / double(values.size());
}

double mse_frames(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ConfigError("frame resolution mismatch: " + std::to_string(a.width) + "x" +
                      std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                      std::to_string(b.height));
  }
  if (!a.valid() || !b.valid()) throw ConfigError("mse_frames: invalid frame");
  std::uint64_t sum = 0;
  const std::size_t n = a.pixels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int d = int(a.pixels[i]) - int(b.pixels[i]);
    sum += std::uint64_t(d * d);
  }
  return double(sum) / (double(n) * 255.0 * 255.0);
}

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ConfigError(std::string(what) + ": sequence length mismatch (" + std::to_string(a) +
                      " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw ConfigError(std::string(what) + ": empty frame sequence");
}

}  // namespace

double long_context_memory(std::span<const Frame> pred, std::span<const Frame> gt) {
  check_lengths(pred.size(), gt.size(), "long_context_memory");
  std::vector<double> per_frame(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) per_frame[i] = mse_frames(pred[i], gt[i]);
  return mean(per_frame);
}

double generated_scene_consistency(std::span<const Frame> fwd, std::span<const Frame> rev) {
  check_lengths(fwd.size(), rev.size(), "generated_scene_consistency");
  const std::size_t k = fwd.size();
  std::vector<double> per_pair(k);
  for (std::size_t i = 0; i < k; ++i) per_pair[i] = mse_frames(fwd[i], rev[k - 1 - i]);
  return mean(per_pair);
}

double action_space_generalization(std::span<const Frame> pred, std::span<const Frame> gt) {
  return long_context_memory(pred, gt);
}

double aggregate_generalization(const std::map<std::string, std::vector<double>>& per_preset) {
  if (per_preset.empty()) throw ConfigError("action-space generalization: empty preset suite");
  std::vector<double> preset_means;
  for (const auto& [preset, scores] : per_preset) {
    if (scores.empty()) throw ConfigError("action-space generalization: preset '" + preset + "' has no episodes");
    preset_means.push_back(mean(scores));
  }
  return mean(preset_means);
}

std::optional<double> MetricReport::score(const std::string& dimension) const {
  auto it = scores.find(dimension);
  if (it == scores.end()) return std::nullopt;
  return it->second;
}

MetricReport aggregate_report(std::span<const EpisodeResult> results, const std::string& model,
                              const std::string& context_policy, const std::string& perspective) {
  if (results.empty()) throw ConfigError("aggregate_report: no episode results");

  std::map<std::string, std::set<std::string>> suite_dims;
  for (const auto& r : results) {
    auto& dims = suite_dims[r.suite];
    for (const auto& [d, v] : r.scores) {
      dims.insert(d);
      if (!std::isfinite(v) || v < 0.0) {
        throw ConfigError("aggregate_report: episode '" + r.episode + "' has invalid " + d + " score");
      }
    }
  }
  for (const auto& r : results) {
    for (const auto& d : suite_dims[r.suite]) {
      if (!r.scores.count(d)) {
        throw ConfigError("aggregate_report: episode '" + r.episode + "' (suite " + r.suite +
                          ") is missing dimension '" + d + "'");
      }
    }
  }

  MetricReport report;
  report.model = model;
  report.context_policy = context_policy;
  report.perspective = perspective;
  report.episode_count = results.size();

  std::map<std::string, std::vector<double>> values;
  std::map<std::string, std::vector<double>> asg_by_preset;
  for (const auto& r : results) {
    for (const auto& [d, v] : r.scores) {
      values[d].push_back(v);
      if (d == dim::kAsg) asg_by_preset[r.preset].push_back(v);
    }
  }
  for (const auto& [d, vs] : values) {
    report.counts[d] = vs.size();
    report.scores[d] = (d == dim::kAsg) ? aggregate_generalization(asg_by_preset) : mean(vs);
  }
  for (const auto& [preset, vs] : asg_by_preset) report.asg_per_preset[preset] = mean(vs);
  return report;
}

}  // namespace wmbench
