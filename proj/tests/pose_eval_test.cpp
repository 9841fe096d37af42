#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "support.hpp"
#include "wmbench/error.hpp"
#include "wmbench/pose_eval.hpp"
#include "wmbench/rng.hpp"

namespace wmbench {
namespace {

using Eigen::Quaterniond;
using Eigen::Vector3d;

Quaterniond random_rotation(Rng& rng) {
  // Shoemake's uniform quaternion
  const double u1 = rng.uniform(), u2 = rng.uniform() * 2 * M_PI, u3 = rng.uniform() * 2 * M_PI;
  return Quaterniond(std::sqrt(u1) * std::cos(u3), std::sqrt(1 - u1) * std::sin(u2),
                     std::sqrt(1 - u1) * std::cos(u2), std::sqrt(u1) * std::sin(u3));
}

std::vector<Vector3d> random_points(Rng& rng, int n, double spread = 10.0) {
  std::vector<Vector3d> pts;
  for (int i = 0; i < n; ++i) {
    pts.emplace_back(rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(-spread, spread));
  }
  return pts;
}

PoseTrajectory random_trajectory(Rng& rng, int n) {
  PoseTrajectory t;
  for (int i = 0; i < n; ++i) {
    TimedPose p;
    p.timestamp = i / 24.0;
    p.translation = Vector3d(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-5, 5));
    p.rotation = random_rotation(rng);
    t.samples.push_back(p);
  }
  return t;
}

TEST(Umeyama, IdentityOnEqualSets) {
  const std::vector<Vector3d> pts{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0, 0, 3}};
  const Sim3Transform xf = umeyama_align(pts, pts);
  EXPECT_NEAR(xf.scale(), 1.0, 1e-12);
  EXPECT_TRUE(xf.rotation_matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  EXPECT_LT(xf.translation().norm(), 1e-12);
}

TEST(Umeyama, RecoversKnownTransform) {
  Rng rng(42);
  const Quaterniond r0 = random_rotation(rng);
  const Vector3d t0(3.0, -7.0, 1.5);
  const auto src = random_points(rng, 100);
  std::vector<Vector3d> dst;
  for (const auto& p : src) dst.push_back(2.5 * (r0 * p) + t0);
  const Sim3Transform xf = umeyama_align(src, dst);
  EXPECT_NEAR(xf.scale(), 2.5, 1e-9);
  EXPECT_LT((xf.rotation_matrix() - r0.toRotationMatrix()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((xf.translation() - t0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Umeyama, AgreesWithEigenOnNoisyData) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto src = random_points(rng, 50);
    const Quaterniond r0 = random_rotation(rng);
    std::vector<Vector3d> dst;
    for (const auto& p : src) {
      dst.push_back(1.7 * (r0 * p) +
                    Vector3d(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)));
    }
    Eigen::Matrix3Xd s(3, src.size()), d(3, dst.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      s.col(Eigen::Index(i)) = src[i];
      d.col(Eigen::Index(i)) = dst[i];
    }
    const Eigen::Matrix4d ref = Eigen::umeyama(s, d, true);
    const Sim3Transform xf = umeyama_align(src, dst);
    const double ref_scale = ref.block<3, 1>(0, 0).norm();
    EXPECT_NEAR(xf.scale(), ref_scale, 1e-9);
    const Eigen::Matrix3d ref_rot = ref.block<3, 3>(0, 0) / ref_scale;
    EXPECT_LT((xf.rotation_matrix() - ref_rot).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((xf.translation() - ref.block<3, 1>(0, 3)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Umeyama, MirrorImageGivesProperRotation) {
  Rng rng(3);
  const auto src = random_points(rng, 30);
  std::vector<Vector3d> dst;
  for (const auto& p : src) dst.emplace_back(p.x(), p.y(), -p.z());  // reflection in z = 0
  const Sim3Transform xf = umeyama_align(src, dst);
  EXPECT_NEAR(xf.rotation_matrix().determinant(), 1.0, 1e-12);
  EXPECT_GT(alignment_residual(xf, src, dst), 0.0);
}

TEST(Umeyama, DegenerateInputs) {
  const std::vector<Vector3d> same(5, Vector3d(1, 2, 3));
  EXPECT_THROW(umeyama_align(same, same), DegenerateError);
  std::vector<Vector3d> line;
  for (int i = 0; i < 5; ++i) line.emplace_back(i, 0, 0);
  EXPECT_THROW(umeyama_align(line, line), DegenerateError);
  const std::vector<Vector3d> a{{0, 0, 0}, {1, 0, 0}}, b{{0, 0, 0}};
  EXPECT_THROW(umeyama_align(a, b), ConfigError);
}

TEST(Sim3, ApplyThenInverseRestores) {
  Rng rng(11);
  const PoseTrajectory traj = random_trajectory(rng, 40);
  const Sim3Transform xf(0.37, random_rotation(rng), Vector3d(10, -4, 2));
  const PoseTrajectory back = apply_alignment(xf.inverse(), apply_alignment(xf, traj));
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_LT((back.samples[i].translation - traj.samples[i].translation).norm(), 1e-12);
    EXPECT_LT(back.samples[i].rotation.angularDistance(traj.samples[i].rotation), 1e-12);
  }
}

TEST(Sim3, IdentityAndTranslation) {
  Rng rng(12);
  const PoseTrajectory traj = random_trajectory(rng, 10);
  const PoseTrajectory same = apply_alignment(Sim3Transform::identity(), traj);
  const Vector3d t0(1, 2, 3);
  const PoseTrajectory moved = apply_alignment(Sim3Transform(1.0, Quaterniond::Identity(), t0), traj);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(same.samples[i].translation, traj.samples[i].translation);
    EXPECT_LT((moved.samples[i].translation - traj.samples[i].translation - t0).norm(), 1e-12);
    EXPECT_LT(moved.samples[i].rotation.angularDistance(traj.samples[i].rotation), 1e-15);
  }
}

TEST(Rpe, EqualTrajectoriesGiveZero) {
  Rng rng(1);
  const PoseTrajectory t = random_trajectory(rng, 30);
  const RpeResult r = rpe(t, t);
  EXPECT_EQ(r.trans_rmse, 0.0);
  EXPECT_EQ(r.rot_rmse, 0.0);
  EXPECT_EQ(r.pairs, 29u);
}

TEST(Rpe, InvariantToGlobalRigidOffset) {
  Rng rng(2);
  const PoseTrajectory ref = random_trajectory(rng, 30);
  const PoseTrajectory est = apply_alignment(Sim3Transform(1.0, random_rotation(rng), Vector3d(100, -30, 4)), ref);
  const RpeResult r = rpe(est, ref, 2);
  EXPECT_LT(r.trans_rmse, 1e-12);
  EXPECT_LT(r.rot_rmse, 1e-9);
}

TEST(Rpe, PerStepDriftIsEpsilon) {
  PoseTrajectory ref, est;
  for (int i = 0; i < 50; ++i) {
    TimedPose p;
    p.timestamp = i / 24.0;
    ref.samples.push_back(p);
    p.translation.x() = 0.01 * i;
    est.samples.push_back(p);
  }
  const RpeResult r = rpe(est, ref, 1);
  EXPECT_NEAR(r.trans_rmse, 0.01, 1e-12);
  EXPECT_EQ(r.rot_rmse, 0.0);
}

TEST(Rpe, RejectsBadDelta) {
  Rng rng(3);
  const PoseTrajectory t = random_trajectory(rng, 5);
  EXPECT_THROW(rpe(t, t, 0), ConfigError);
  EXPECT_THROW(rpe(t, t, 5), ConfigError);
}

TEST(Associate, NearestWithinTolerance) {
  PoseTrajectory a, b;
  for (int i = 0; i < 5; ++i) {
    a.samples.push_back({i / 24.0, Vector3d::Zero(), Quaterniond::Identity()});
    b.samples.push_back({i / 24.0 + 0.001, Vector3d::Zero(), Quaterniond::Identity()});
  }
  b.samples.erase(b.samples.begin() + 2);
  const auto pairs = associate(a, b);
  ASSERT_EQ(pairs.size(), 4u);
  EXPECT_EQ(pairs[2], (std::pair<std::size_t, std::size_t>{3, 2}));
}

TEST(Align, DegenerateFallsBackToCentroid) {
  PoseTrajectory est, ref;
  for (int i = 0; i < 6; ++i) {
    TimedPose p;
    p.timestamp = i / 24.0;
    p.translation = Vector3d(i, 0, 0);
    est.samples.push_back(p);
    p.translation = Vector3d(i + 5, 1, 0);
    ref.samples.push_back(p);
  }
  const AlignmentResult r = align_trajectories(est, ref);
  EXPECT_TRUE(r.degenerate);
  EXPECT_LT(ate_rmse(apply_alignment(r.transform, est), ref), 1e-12);
}

TEST(PoseRotation, ForwardAxisIsViewDirection) {
  Pose p;
  p.yaw = 90.0;  // east
  const Vector3d fwd = pose_rotation(p) * Vector3d(0, 0, 1);
  EXPECT_NEAR(fwd.x(), 1.0, 1e-15);
  EXPECT_NEAR(fwd.y(), 0.0, 1e-15);
  p.yaw = 0.0;
  p.pitch = 30.0;
  const Vector3d up = pose_rotation(p) * Vector3d(0, 0, 1);
  EXPECT_NEAR(up.z(), 0.5, 1e-15);
  EXPECT_NEAR(pose_rotation(p).toRotationMatrix().determinant(), 1.0, 1e-14);
}

TEST(Tum, RoundTripExact) {
  Rng rng(4);
  const PoseTrajectory t = random_trajectory(rng, 25);
  const PoseTrajectory back = parse_tum(format_tum(t));
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.samples[i].timestamp, t.samples[i].timestamp);
    EXPECT_EQ(back.samples[i].translation, t.samples[i].translation);
    EXPECT_EQ(back.samples[i].rotation.coeffs(), t.samples[i].rotation.coeffs());
  }
  testing::TempDir dir;
  write_tum(t, dir / "t.tum");
  EXPECT_EQ(format_tum(read_tum(dir / "t.tum")), format_tum(t));
}

TEST(Tum, SevenFieldsNamesLine) {
  const std::string text = "# header\n0 0 0 0 0 0 0 1\n0.1 1 2 3 0 0 0\n";
  try {
    parse_tum(text, "x.tum");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("x.tum:3"), std::string::npos) << e.what();
  }
}

TEST(Tum, QuaternionNormTolerance) {
  // |q| = 1.0005 is normalized, |q| = 0.9 is rejected
  const PoseTrajectory ok = parse_tum("0 0 0 0 0 0 0 1.0005\n");
  EXPECT_NEAR(ok.samples[0].rotation.norm(), 1.0, 1e-15);
  EXPECT_THROW(parse_tum("0 0 0 0 0 0 0 0.9\n"), FormatError);
}

TEST(Tum, NonIncreasingTimestampsRejected) {
  EXPECT_THROW(parse_tum("0.2 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 0 1\n"), FormatError);
}

}  // namespace
}  // namespace wmbench
