#include "wmbench/pose_eval.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wmbench/det_math.hpp"
#include "wmbench/error.hpp"

namespace wmbench {

std::vector<Eigen::Vector3d> PoseTrajectory::positions() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.translation);
  return out;
}

void PoseTrajectory::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && !(samples[i].timestamp > samples[i - 1].timestamp)) {
      throw ConfigError("trajectory timestamps not strictly increasing at sample " + std::to_string(i));
    }
    if (std::abs(samples[i].rotation.norm() - 1.0) > 1e-9) {
      throw ConfigError("trajectory quaternion not unit norm at sample " + std::to_string(i));
    }
  }
}

Eigen::Quaterniond pose_rotation(const Pose& pose) {
  double sy, cy, sp, cp;
  detmath::sincos_deg(pose.yaw, sy, cy);
  detmath::sincos_deg(pose.pitch, sp, cp);
  Eigen::Matrix3d m;
  m.col(0) = Eigen::Vector3d(cy, -sy, 0.0);            // right
  m.col(1) = Eigen::Vector3d(sp * sy, sp * cy, -cp);   // down
  m.col(2) = Eigen::Vector3d(cp * sy, cp * cy, sp);    // forward
  Eigen::Quaterniond q(m);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

TimedPose to_timed_pose(const Pose& pose, double timestamp) {
  TimedPose tp;
  tp.timestamp = timestamp;
  tp.translation = Eigen::Vector3d(pose.position.x, pose.position.y, pose.position.z);
  tp.rotation = pose_rotation(pose);
  return tp;
}

PoseTrajectory to_trajectory(std::span<const Pose> poses, double fps, std::size_t first_index) {
  PoseTrajectory traj;
  traj.samples.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    traj.samples.push_back(to_timed_pose(poses[i], double(first_index + i) / fps));
  }
  return traj;
}

// ---------------------------------------------------------------------------

Sim3Transform::Sim3Transform(double scale, const Eigen::Quaterniond& rotation,
                             const Eigen::Vector3d& translation)
    : scale_(scale), rotation_(rotation.normalized()), translation_(translation) {
  if (!(scale > 0.0)) throw ConfigError("Sim3 scale must be > 0");
}

Eigen::Vector3d Sim3Transform::apply(const Eigen::Vector3d& x) const {
  return scale_ * (rotation_ * x) + translation_;
}

Sim3Transform Sim3Transform::inverse() const {
  const Eigen::Quaterniond rinv = rotation_.conjugate();
  return Sim3Transform(1.0 / scale_, rinv, -(rinv * translation_) / scale_);
}

Sim3Transform operator*(const Sim3Transform& a, const Sim3Transform& b) {
  return Sim3Transform(a.scale_ * b.scale_, a.rotation_ * b.rotation_, a.apply(b.translation_));
}

Sim3Transform umeyama_align(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst) {
  if (src.size() != dst.size()) {
    throw ConfigError("umeyama_align: point count mismatch (" + std::to_string(src.size()) + " vs " +
                      std::to_string(dst.size()) + ")");
  }
  const std::size_t n = src.size();
  if (n < 3) throw DegenerateError("umeyama_align: need at least 3 correspondences");

  Eigen::Vector3d mean_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_src += src[i];
    mean_dst += dst[i];
  }
  mean_src /= double(n);
  mean_dst /= double(n);

  double var_src = 0.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d a = src[i] - mean_src;
    const Eigen::Vector3d b = dst[i] - mean_dst;
    var_src += a.squaredNorm();
    cov += b * a.transpose();
  }
  var_src /= double(n);
  cov /= double(n);
  if (!(var_src > 0.0)) throw DegenerateError("umeyama_align: source points coincide");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-10 * sv(0)) {
    throw DegenerateError("umeyama_align: cross-covariance has rank < 2 (collinear points)");
  }
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Vector3d sign(1.0, 1.0, 1.0);
  if (u.determinant() * v.determinant() < 0.0) sign(2) = -1.0;

  const Eigen::Matrix3d r = u * sign.asDiagonal() * v.transpose();
  const double scale = sv.dot(sign) / var_src;
  const Eigen::Vector3d t = mean_dst - scale * (r * mean_src);
  return Sim3Transform(scale, Eigen::Quaterniond(r), t);
}

double alignment_residual(const Sim3Transform& xf, std::span<const Eigen::Vector3d> src,
                          std::span<const Eigen::Vector3d> dst) {
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) sum += (dst[i] - xf.apply(src[i])).squaredNorm();
  return sum;
}

PoseTrajectory apply_alignment(const Sim3Transform& xf, const PoseTrajectory& traj) {
  PoseTrajectory out = traj;
  for (auto& s : out.samples) {
    s.translation = xf.apply(s.translation);
    s.rotation = (xf.rotation() * s.rotation).normalized();
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> associate(const PoseTrajectory& est,
                                                           const PoseTrajectory& ref,
                                                           const AssociationOptions& opts) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (ref.empty()) return pairs;
  std::size_t next_ref = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double ts = est.samples[i].timestamp;
    auto it = std::lower_bound(ref.samples.begin() + std::ptrdiff_t(next_ref), ref.samples.end(), ts,
                               [](const TimedPose& p, double t) { return p.timestamp < t; });
    std::size_t best = ref.size();
    double best_dt = opts.max_offset;
    const std::size_t upper = std::size_t(it - ref.samples.begin());
    for (std::size_t c : {upper - 1, upper}) {  // upper - 1 may wrap; rejected below
      if (c < next_ref || c >= ref.size()) continue;
      const double dt = std::abs(ref.samples[c].timestamp - ts);
      if (dt <= best_dt) {
        best_dt = dt;
        best = c;
      }
    }
    if (best < ref.size()) {
      pairs.emplace_back(i, best);
      next_ref = best + 1;
    }
  }
  return pairs;
}

namespace {

struct Se3 {
  Eigen::Quaterniond q;
  Eigen::Vector3d t;
  Se3 inverse() const {
    const Eigen::Quaterniond qi = q.conjugate();
    return {qi, -(qi * t)};
  }
  Se3 operator*(const Se3& o) const { return {q * o.q, q * o.t + t}; }
};

Se3 se3(const TimedPose& p) { return {p.rotation, p.translation}; }

double rotation_angle_deg(const Eigen::Quaterniond& q) {
  const Eigen::Quaterniond n = q.normalized();
  return 2.0 * std::atan2(n.vec().norm(), std::abs(n.w())) * 180.0 / detmath::kPi;
}

}  // namespace

RpeResult rpe(const PoseTrajectory& est, const PoseTrajectory& ref, int delta,
              const AssociationOptions& opts) {
  if (delta < 1) throw ConfigError("rpe: delta must be >= 1");
  const auto pairs = associate(est, ref, opts);
  if (pairs.size() < std::size_t(delta) + 1) {
    throw ConfigError("rpe: only " + std::to_string(pairs.size()) +
                      " poses associated within the timestamp tolerance; need at least " +
                      std::to_string(delta + 1));
  }
  double sum_t = 0.0, sum_r = 0.0;
  const std::size_t count = pairs.size() - std::size_t(delta);
  for (std::size_t k = 0; k < count; ++k) {
    const auto [ei, ri] = pairs[k];
    const auto [ej, rj] = pairs[k + std::size_t(delta)];
    const Se3 rel_ref = se3(ref.samples[ri]).inverse() * se3(ref.samples[rj]);
    const Se3 rel_est = se3(est.samples[ei]).inverse() * se3(est.samples[ej]);
    const Se3 err = rel_ref.inverse() * rel_est;
    sum_t += err.t.squaredNorm();
    const double ang = rotation_angle_deg(err.q);
    sum_r += ang * ang;
  }
  RpeResult r;
  r.trans_rmse = std::sqrt(sum_t / double(count));
  r.rot_rmse = std::sqrt(sum_r / double(count));
  r.delta = delta;
  r.pairs = count;
  return r;
}

double ate_rmse(const PoseTrajectory& est, const PoseTrajectory& ref, const AssociationOptions& opts) {
  const auto pairs = associate(est, ref, opts);
  if (pairs.empty()) throw ConfigError("ate: no associated poses");
  double sum = 0.0;
  for (auto [e, r] : pairs) sum += (est.samples[e].translation - ref.samples[r].translation).squaredNorm();
  return std::sqrt(sum / double(pairs.size()));
}

AlignmentResult align_trajectories(const PoseTrajectory& est, const PoseTrajectory& ref,
                                   const AssociationOptions& opts) {
  const auto pairs = associate(est, ref, opts);
  if (pairs.empty()) throw ConfigError("align: no associated poses");
  std::vector<Eigen::Vector3d> src, dst;
  for (auto [e, r] : pairs) {
    src.push_back(est.samples[e].translation);
    dst.push_back(ref.samples[r].translation);
  }
  AlignmentResult out;
  try {
    out.transform = umeyama_align(src, dst);
  } catch (const DegenerateError&) {
    Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
      cs += src[i];
      cd += dst[i];
    }
    out.transform = Sim3Transform(1.0, Eigen::Quaterniond::Identity(), (cd - cs) / double(src.size()));
    out.degenerate = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// TUM I/O

PoseTrajectory parse_tum(const std::string& text, const std::string& source) {
  PoseTrajectory traj;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    double v[8];
    int fields = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
      if (p >= end) break;
      double value = 0.0;
      auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc{}) {
        throw FormatError(source + ":" + std::to_string(line_no) + ": malformed number");
      }
      if (fields < 8) v[fields] = value;
      ++fields;
      p = next;
    }
    if (fields != 8) {
      throw FormatError(source + ":" + std::to_string(line_no) + ": expected 8 fields, got " +
                        std::to_string(fields));
    }
    TimedPose tp;
    tp.timestamp = v[0];
    tp.translation = Eigen::Vector3d(v[1], v[2], v[3]);
    tp.rotation = Eigen::Quaterniond(v[7], v[4], v[5], v[6]);
    const double norm = tp.rotation.norm();
    if (std::abs(norm - 1.0) > 1e-3) {
      throw FormatError(source + ":" + std::to_string(line_no) + ": quaternion norm " +
                        std::to_string(norm) + " is not unit");
    }
    if (std::abs(norm - 1.0) > 1e-9) tp.rotation.normalize();
    if (!traj.samples.empty() && !(tp.timestamp > traj.samples.back().timestamp)) {
      throw FormatError(source + ":" + std::to_string(line_no) + ": timestamp not strictly increasing");
    }
    traj.samples.push_back(tp);
  }
  return traj;
}

PoseTrajectory read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open trajectory " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_tum(buf.str(), path.string());
}

std::string format_tum(const PoseTrajectory& traj) {
  std::string out = "# timestamp tx ty tz qx qy qz qw\n";
  char line[512];
  for (const auto& s : traj.samples) {
    std::snprintf(line, sizeof line, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", s.timestamp,
                  s.translation.x(), s.translation.y(), s.translation.z(), s.rotation.x(),
                  s.rotation.y(), s.rotation.z(), s.rotation.w());
    out += line;
  }
  return out;
}

void write_tum(const PoseTrajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << format_tum(traj);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace wmbench
