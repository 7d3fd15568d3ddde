#include "scenediff/train_common.hpp"

#include <cmath>

#include "scenediff/common.hpp"

namespace scenediff {

DiffusionDraw make_draw(int batch, int rows, int cols, const ddpm::NoiseSchedule& sched,
                        double p_uncond, Rng& rng) {
  check(batch > 0 && rows > 0 && cols > 0, "make_draw: empty draw");
  DiffusionDraw draw;
  draw.t.reserve(batch);
  draw.uncond.reserve(batch);
  for (int e = 0; e < batch; ++e) {
    draw.t.push_back(static_cast<int>(rng.uniform_int(1, sched.T)));
    draw.uncond.push_back(rng.uniform() < p_uncond ? 1 : 0);
  }
  draw.noise.resize(batch * rows, cols);
  for (Eigen::Index r = 0; r < draw.noise.rows(); ++r)
    for (Eigen::Index c = 0; c < cols; ++c) draw.noise(r, c) = rng.normal();
  return draw;
}

Eigen::MatrixXd time_embedding(const std::vector<int>& t, int dim) {
  check(dim >= 2 && dim % 2 == 0, "time_embedding: dim must be even");
  const int half = dim / 2;
  Eigen::MatrixXd e(static_cast<Eigen::Index>(t.size()), dim);
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (int j = 0; j < half; ++j) {
      const double freq = std::exp(-std::log(10000.0) * j / half);
      e(i, j) = std::sin(t[i] * freq);
      e(i, half + j) = std::cos(t[i] * freq);
    }
  }
  return e;
}

}  // namespace scenediff
