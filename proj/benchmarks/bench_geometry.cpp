#include <benchmark/benchmark.h>

#include "scenediff/geometry.hpp"
#include "scenediff/rng.hpp"
#include "scenediff/scene.hpp"

using namespace scenediff;

namespace {

RotatedBox3D random_box(Rng& rng) {
  RotatedBox3D b;
  for (int i = 0; i < 3; ++i) {
    b.center[i] = rng.uniform(-1.0, 1.0);
    b.half_extents[i] = rng.uniform(0.2, 0.8);
  }
  b.yaw = rng.uniform(-3.14, 3.14);
  return b;
}

void BM_RotatedIou(benchmark::State& state) {
  Rng rng(1);
  std::vector<std::pair<RotatedBox3D, RotatedBox3D>> pairs(256);
  for (auto& p : pairs) p = {random_box(rng), random_box(rng)};
  size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(rotated_iou_3d(a, b));
  }
}
BENCHMARK(BM_RotatedIou);

void BM_PairwiseSceneIou(benchmark::State& state) {
  Rng rng(2);
  Room room;
  for (int i = 0; i < state.range(0); ++i) {
    ObjectInstance o;
    o.category = "box";
    const RotatedBox3D b = random_box(rng);
    o.half_size = b.half_extents;
    o.location = b.center;
    o.yaw = b.yaw;
    room.objects.push_back(o);
  }
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_scene_iou(room));
}
BENCHMARK(BM_PairwiseSceneIou)->Arg(8)->Arg(16)->Arg(32);

}  // namespace
