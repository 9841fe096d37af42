#include <benchmark/benchmark.h>

#include <vector>

#include "wmbench/pose_eval.hpp"
#include "wmbench/rng.hpp"

namespace {

using namespace wmbench;

void BM_UmeyamaAlign(benchmark::State& state) {
  Rng rng(4);
  const Sim3Transform xf(2.5, Eigen::Quaterniond(Eigen::AngleAxisd(0.9, Eigen::Vector3d(1, -2, 0.5).normalized())),
                         Eigen::Vector3d(10, -4, 7));
  std::vector<Eigen::Vector3d> src, dst;
  for (int i = 0; i < state.range(0); ++i) {
    src.emplace_back(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    dst.push_back(xf.apply(src.back()));
  }
  for (auto _ : state) benchmark::DoNotOptimize(umeyama_align(src, dst));
}
BENCHMARK(BM_UmeyamaAlign)->Arg(100)->Arg(10000);

PoseTrajectory wobbly_trajectory(Rng& rng, int n) {
  std::vector<Pose> poses;
  Pose p;
  for (int i = 0; i < n; ++i) {
    p.position.x += rng.uniform(-5, 5);
    p.position.y += 150;
    p.yaw = rng.uniform(0, 360);
    p.pitch = rng.uniform(-20, 20);
    poses.push_back(p);
  }
  return to_trajectory(poses, 24.0);
}

void BM_Rpe(benchmark::State& state) {
  Rng rng(5);
  const PoseTrajectory ref = wobbly_trajectory(rng, 97);
  const PoseTrajectory est = apply_alignment(
      Sim3Transform(1.0, Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitZ())), {1, 2, 3}), ref);
  for (auto _ : state) benchmark::DoNotOptimize(rpe(est, ref));
}
BENCHMARK(BM_Rpe);

void BM_TumRoundTrip(benchmark::State& state) {
  Rng rng(6);
  const PoseTrajectory t = wobbly_trajectory(rng, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(parse_tum(format_tum(t)));
}
BENCHMARK(BM_TumRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace
