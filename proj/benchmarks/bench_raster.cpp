#include <benchmark/benchmark.h>

#include "scenediff/metrics.hpp"
#include "scenediff/raster.hpp"
#include "scenediff/rng.hpp"
#include "scenediff/scene.hpp"

using namespace scenediff;

namespace {

std::vector<Room> random_rooms(int count, Rng& rng) {
  std::vector<Room> rooms;
  const char* cats[] = {"desk", "chair", "bookcase"};
  for (int i = 0; i < count; ++i) {
    Room room;
    room.room_id = "r" + std::to_string(i);
    room.room_type = "office";
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 5));
    for (int j = 0; j < n; ++j) {
      ObjectInstance o;
      o.category = cats[j % 3];
      for (int k = 0; k < 3; ++k) o.half_size[k] = rng.uniform(0.1, 0.5);
      o.location = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), o.half_size.z()};
      o.yaw = rng.uniform(-3.14, 3.14);
      room.objects.push_back(o);
    }
    rooms.push_back(std::move(room));
  }
  return rooms;
}

void BM_RasterizeTopdown(benchmark::State& state) {
  Rng rng(1);
  const auto rooms = random_rooms(64, rng);
  size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rasterize_topdown(rooms[i++ % rooms.size()], static_cast<int>(state.range(0)), 2.5));
}
BENCHMARK(BM_RasterizeTopdown)->Arg(32)->Arg(64);

void BM_FidKid(benchmark::State& state) {
  Rng rng(2);
  const auto gen = random_rooms(128, rng);
  const auto ref = random_rooms(128, rng);
  const auto extractor = metrics::random_projection_extractor();
  const metrics::RasterSettings raster{32, 2.5};
  for (auto _ : state)
    benchmark::DoNotOptimize(metrics::fid_kid(gen, ref, extractor, raster));
}
BENCHMARK(BM_FidKid);

}  // namespace

BENCHMARK_MAIN();
