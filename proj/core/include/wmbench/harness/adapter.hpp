#pragma once

// Candidate-model interface. A model sees a context (the memory segment or
// only its last frame) plus the actions to execute, and must return exactly
// k frames at the reference resolution.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmbench/action_space.hpp"
#include "wmbench/error.hpp"
#include "wmbench/frame.hpp"
#include "wmbench/pose_eval.hpp"
#include "wmbench/trajectory.hpp"
#include "wmbench/world_sim.hpp"

namespace wmbench {

enum class ContextPolicy { WithMemory, WithoutMemory };
std::string_view name(ContextPolicy p);
ContextPolicy context_policy_from_name(std::string_view text);

enum class AdapterErrorKind { FrameCount, Resolution, Timeout, Protocol };
std::string_view name(AdapterErrorKind k);

class AdapterError : public Error {
 public:
  AdapterError(AdapterErrorKind kind, const std::string& what)
      : Error(std::string(name(kind)) + ": " + what), kind_(kind) {}
  AdapterErrorKind kind() const noexcept { return kind_; }

 private:
  AdapterErrorKind kind_;
};

/// Simulator state handed to in-process reference models only; external
/// models never see it.
struct OracleHint {
  const World* world = nullptr;
  ActionSpaceConfig cfg;
  Perspective perspective = Perspective::FirstPerson;
  Pose anchor;  ///< agent pose of the last context frame
};

struct PredictionRequest {
  std::string episode_id;
  std::vector<Frame> context;  ///< full memory, or only its last frame
  std::vector<ActionVector> actions;
  int k = 0;
  Resolution resolution;
  ContextPolicy policy = ContextPolicy::WithMemory;
  double fps = kFps;
  std::size_t first_frame_index = 0;  ///< episode index of the first predicted frame
  std::optional<OracleHint> hint;
};

struct Prediction {
  std::vector<Frame> frames;
  /// Camera trajectory for frames first_frame_index-1 .. first_frame_index+k-1
  /// in episode time (index / fps), when the model can supply one.
  std::optional<PoseTrajectory> trajectory;
  /// Agent poses for the k predicted frames (reference models only).
  std::optional<std::vector<Pose>> agent_poses;
};

class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;
  virtual std::string label() const = 0;
  virtual std::string mode() const = 0;  ///< in-process | directory-exchange | streaming
  virtual ContextPolicy policy() const = 0;
  /// True for models that may receive an OracleHint.
  virtual bool wants_hint() const { return false; }
  virtual Prediction predict(const PredictionRequest& request) = 0;
};

/// Checks frame count and resolution; throws AdapterError.
void check_prediction(const Prediction& p, int k, Resolution res);

/// Builds the request for an episode's prediction window (context per the
/// adapter's policy, actions a_{T+1..T+k}), runs the model and validates
/// its output. `world` is only used to build a hint for hint-taking models.
Prediction run_model(ModelAdapter& adapter, const Episode& episode, const std::string& episode_id,
                     const World* world = nullptr);

/// Lower-level form used for the two legs of a mirror probe.
Prediction run_request(ModelAdapter& adapter, PredictionRequest request);

}  // namespace wmbench
