#pragma once

// Trajectory accuracy: TUM I/O, Sim(3) Umeyama alignment, relative pose error.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wmbench/action_space.hpp"

namespace wmbench {

struct TimedPose {
  double timestamp = 0.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  ///< camera-to-world
};

struct PoseTrajectory {
  std::vector<TimedPose> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<Eigen::Vector3d> positions() const;
  /// Throws ConfigError when timestamps are not strictly increasing or a
  /// quaternion is off unit norm by more than 1e-9.
  void validate() const;
};

/// Camera orientation as a quaternion. Camera-local axes are
/// (right, down, forward) so that local [0, 0, 1] is the viewing direction.
Eigen::Quaterniond pose_rotation(const Pose& pose);
TimedPose to_timed_pose(const Pose& pose, double timestamp);
PoseTrajectory to_trajectory(std::span<const Pose> poses, double fps, std::size_t first_index = 0);

/// Similarity transform x -> s * R * x + t.
class Sim3Transform {
 public:
  Sim3Transform() = default;
  Sim3Transform(double scale, const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation);

  static Sim3Transform identity() { return {}; }

  double scale() const { return scale_; }
  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const;
  Sim3Transform inverse() const;
  /// (a * b)(x) = a(b(x))
  friend Sim3Transform operator*(const Sim3Transform& a, const Sim3Transform& b);

 private:
  double scale_ = 1.0;
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Least-squares similarity (s, R, t) minimizing sum |dst_i - (s R src_i + t)|^2.
/// R is always a proper rotation. Throws DegenerateError when the
/// cross-covariance has rank < 2 or the source has no spread.
Sim3Transform umeyama_align(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst);

/// Sum of squared residuals of `xf` mapping src onto dst.
double alignment_residual(const Sim3Transform& xf, std::span<const Eigen::Vector3d> src,
                          std::span<const Eigen::Vector3d> dst);

PoseTrajectory apply_alignment(const Sim3Transform& xf, const PoseTrajectory& traj);

struct AssociationOptions {
  double max_offset = 0.5 / 24.0;  ///< seconds; half a frame period at 24 FPS
};

/// Index pairs (est, ref) matched by nearest timestamp within max_offset,
/// one-to-one and in increasing order.
std::vector<std::pair<std::size_t, std::size_t>> associate(const PoseTrajectory& est,
                                                           const PoseTrajectory& ref,
                                                           const AssociationOptions& opts = {});

struct RpeResult {
  double trans_rmse = 0.0;  ///< world units
  double rot_rmse = 0.0;    ///< degrees
  int delta = 1;            ///< frames
  std::size_t pairs = 0;
};

RpeResult rpe(const PoseTrajectory& est, const PoseTrajectory& ref, int delta = 1,
              const AssociationOptions& opts = {});

/// Absolute trajectory error (position RMSE) after associating; diagnostic only.
double ate_rmse(const PoseTrajectory& est, const PoseTrajectory& ref,
                const AssociationOptions& opts = {});

struct AlignmentResult {
  Sim3Transform transform;
  bool degenerate = false;  ///< fell back to a centroid-only translation
};

/// Aligns est onto ref using associated positions. Degenerate geometry
/// (collinear or coincident positions) falls back to matching centroids.
AlignmentResult align_trajectories(const PoseTrajectory& est, const PoseTrajectory& ref,
                                   const AssociationOptions& opts = {});

// TUM text format: "timestamp tx ty tz qx qy qz qw" per line, '#' comments.
// Written with 17 significant digits, which round-trips doubles exactly.
PoseTrajectory read_tum(const std::filesystem::path& path);
PoseTrajectory parse_tum(const std::string& text, const std::string& source = "<memory>");
void write_tum(const PoseTrajectory& traj, const std::filesystem::path& path);
std::string format_tum(const PoseTrajectory& traj);

}  // namespace wmbench
