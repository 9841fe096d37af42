#include <benchmark/benchmark.h>

#include "wmbench/action_space.hpp"
#include "wmbench/det_math.hpp"
#include "wmbench/world_sim.hpp"

namespace {

using namespace wmbench;

const World& world() {
  static const World w = build_world({3, SceneCategory::Urban, 24000.0});
  return w;
}

void BM_BuildWorld(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(build_world({seed++, SceneCategory::Landscape, 24000.0}));
}
BENCHMARK(BM_BuildWorld);

void BM_RenderFirstPerson(benchmark::State& state) {
  const Resolution res{int(state.range(0)), int(state.range(0)) * 3 / 4};
  Pose p = start_pose(world());
  for (auto _ : state) {
    p.yaw = detmath::wrap_degrees(p.yaw + 0.7);
    benchmark::DoNotOptimize(render(world(), p, res));
  }
  state.SetItemsProcessed(state.iterations() * res.width * res.height);
}
BENCHMARK(BM_RenderFirstPerson)->Arg(64)->Arg(256);

void BM_RenderThirdPerson(benchmark::State& state) {
  const Resolution res{256, 192};
  Pose p = start_pose(world());
  for (auto _ : state) {
    p.yaw = detmath::wrap_degrees(p.yaw + 0.7);
    benchmark::DoNotOptimize(render_third_person(world(), p, res));
  }
  state.SetItemsProcessed(state.iterations() * res.width * res.height);
}
BENCHMARK(BM_RenderThirdPerson);

void BM_SimulateStep(benchmark::State& state) {
  const ActionSpaceConfig cfg = preset("mid");
  Pose p = start_pose(world());
  int i = 0;
  for (auto _ : state) {
    // out and back so the walk stays inside the world
    const ActionVector a = (i++ / 24) % 2 ? ActionVector{ActionPrimitive::S, ActionPrimitive::YawLeft}
                                          : ActionVector{ActionPrimitive::W, ActionPrimitive::YawRight};
    p = step_in_world(world(), p, a, cfg);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_SimulateStep);

}  // namespace
