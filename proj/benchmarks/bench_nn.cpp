#include <benchmark/benchmark.h>

#include "scenediff/ddpm.hpp"
#include "scenediff/flgm.hpp"
#include "scenediff/lgm.hpp"
#include "scenediff/nn/tensor.hpp"
#include "scenediff/normalization.hpp"
#include "scenediff/rng.hpp"
#include "scenediff/scene_tensor.hpp"
#include "scenediff/text.hpp"

using namespace scenediff;

namespace {

// One training room shaped like the desk preset: 12 rows, 7 categories.
Room bench_room(Rng& rng) {
  Room room;
  room.room_type = "office";
  const char* cats[] = {"desk", "chair", "bookcase", "lamp", "monitor", "book"};
  for (int i = 0; i < 6; ++i) {
    ObjectInstance o;
    o.category = cats[i];
    for (int k = 0; k < 3; ++k) {
      o.half_size[k] = rng.uniform(0.1, 0.5);
      o.location[k] = rng.uniform(-1.5, 1.5);
    }
    o.location.z() = o.half_size.z();
    o.yaw = rng.uniform(-3.14, 3.14);
    room.objects.push_back(o);
  }
  return room;
}

struct Fixture {
  CategoryVocab vocab{{"desk", "chair", "bookcase", "lamp", "monitor", "book"}};
  TextVocab tvocab = TextVocab::build(prompt_phrases(
      {"office"}, {"desk", "chair", "bookcase", "lamp", "monitor", "book"}, 12));
  ddpm::NoiseSchedule sched = ddpm::NoiseSchedule::linear(100, 1e-4, 0.2);
  NormalizationStats stats;
  std::vector<Room> rooms;
  std::vector<SceneTensor> batch;
  std::vector<std::string> prompts;

  Fixture() {
    Rng rng(7);
    for (int i = 0; i < 16; ++i) rooms.push_back(bench_room(rng));
    stats = NormalizationStats::fit(rooms);
    for (const Room& r : rooms) {
      batch.push_back(encode_scene(r, stats, vocab, 12));
      prompts.push_back(prompt_for_room(r));
    }
  }
};

void BM_FlgmLossBackward(benchmark::State& state) {
  Fixture fx;
  flgm::FdnConfig cfg;  // defaults: width 64, depth 2, heads 4
  flgm::FlgmModel model = flgm::init_flgm(cfg, fx.vocab, fx.tvocab, fx.stats, fx.sched, 12, 1);
  Rng rng(3);
  const DiffusionDraw draw =
      make_draw(static_cast<int>(fx.batch.size()), 12, fx.batch[0].sc_cols(), fx.sched, 0.1, rng);
  for (auto _ : state) {
    model.params.zero_grad();
    const nn::Tensor loss = flgm_loss_draw(model, fx.batch, fx.prompts, draw);
    nn::backward(loss);
    benchmark::DoNotOptimize(loss->value);
  }
}
BENCHMARK(BM_FlgmLossBackward);

void BM_LgmLossBackward(benchmark::State& state) {
  Fixture fx;
  lgm::LdnConfig cfg;  // defaults: widths {48, 96, 96}, heads 4
  lgm::LgmModel model = lgm::init_lgm(cfg, fx.vocab, fx.stats, fx.sched, 12, 1);
  Rng rng(4);
  const DiffusionDraw draw = make_draw(static_cast<int>(fx.batch.size()), 12,
                                       SceneTensor::lr_cols, fx.sched, 0.0, rng);
  for (auto _ : state) {
    model.params.zero_grad();
    const auto loss = lgm::lgm_loss_draw(model, fx.batch, draw);
    nn::backward(loss.total);
    benchmark::DoNotOptimize(loss.l_lr);
  }
}
BENCHMARK(BM_LgmLossBackward);

void BM_SampleFurnitureList(benchmark::State& state) {
  Fixture fx;
  flgm::FdnConfig cfg;
  flgm::FlgmModel model = flgm::init_flgm(cfg, fx.vocab, fx.tvocab, fx.stats, fx.sched, 12, 1);
  Rng rng(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(flgm::sample_furniture_list(model, "a office with 6 objects", rng));
}
BENCHMARK(BM_SampleFurnitureList);

}  // namespace
