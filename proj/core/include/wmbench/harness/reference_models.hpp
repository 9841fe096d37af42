#pragma once

// In-process reference models with known behaviour, used to validate the
// metrics end to end. All of them are deterministic given (kind, parameter,
// episode id, seed).

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "wmbench/harness/adapter.hpp"
#include "wmbench/rng.hpp"

namespace wmbench {

enum class ReferenceKind { Oracle, Frozen, Noisy, Drift, PresetMismatch };

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::Oracle;
  double sigma = 0.0;    ///< noisy: std-dev per normalized channel
  double epsilon = 0.0;  ///< drift: world units per frame along +x
  std::string assumed_preset;

  /// "oracle", "frozen", "noisy:<sigma>", "drift:<eps>", "mismatch:<preset>".
  static ReferenceSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Shared memo of rendered frames keyed by world, perspective, agent pose
/// and resolution. Bounded; cleared wholesale when full.
class FrameCache {
 public:
  explicit FrameCache(std::size_t max_entries = 2048) : max_entries_(max_entries) {}
  Frame get_or_render(const World& world, Perspective perspective, const Pose& agent, Resolution res,
                      int frame_index);
  std::size_t size() const;

 private:
  std::size_t max_entries_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Frame> frames_;
};

/// Adds i.i.d. uniform noise of the given standard deviation (in [0,1]
/// units) to every channel, then rounds and clamps to 8 bits.
Frame add_uniform_noise(const Frame& f, double sigma, Rng& rng);

class ReferenceModel : public ModelAdapter {
 public:
  ReferenceModel(ReferenceSpec spec, std::uint64_t seed = 0,
                 ContextPolicy policy = ContextPolicy::WithMemory,
                 std::shared_ptr<FrameCache> cache = nullptr);

  std::string label() const override { return spec_.to_string(); }
  std::string mode() const override { return "in-process"; }
  ContextPolicy policy() const override { return policy_; }
  bool wants_hint() const override { return true; }
  Prediction predict(const PredictionRequest& request) override;

  const ReferenceSpec& spec() const { return spec_; }

 private:
  Frame render(const World& world, Perspective p, const Pose& agent, Resolution res, int index) const;

  ReferenceSpec spec_;
  std::uint64_t seed_;
  ContextPolicy policy_;
  std::shared_ptr<FrameCache> cache_;
};

std::unique_ptr<ReferenceModel> make_reference_model(const std::string& text, std::uint64_t seed = 0,
                                                     ContextPolicy policy = ContextPolicy::WithMemory,
                                                     std::shared_ptr<FrameCache> cache = nullptr);

}  // namespace wmbench
