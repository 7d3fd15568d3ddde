#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "scenediff/ddpm.hpp"
#include "scenediff/rng.hpp"

using namespace scenediff;

namespace {

Eigen::MatrixXd randn(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

void BM_QSample(benchmark::State& state) {
  const auto sched = ddpm::NoiseSchedule::linear(1000);
  Rng rng(1);
  const Eigen::MatrixXd x0 = randn(state.range(0), 16, rng);
  const Eigen::MatrixXd noise = randn(state.range(0), 16, rng);
  int t = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ddpm::q_sample(x0, t, noise, sched));
    t = t % sched.T + 1;
  }
}
BENCHMARK(BM_QSample)->Arg(32)->Arg(512);

void BM_SampleLoop(benchmark::State& state) {
  const auto sched = ddpm::NoiseSchedule::linear(static_cast<int>(state.range(0)));
  Rng rng(2);
  const auto denoiser = [](const Eigen::MatrixXd& xt, int) { return (0.1 * xt).eval(); };
  for (auto _ : state)
    benchmark::DoNotOptimize(ddpm::sample_loop(denoiser, 32, 16, sched, rng));
}
BENCHMARK(BM_SampleLoop)->Arg(50)->Arg(200);

}  // namespace
