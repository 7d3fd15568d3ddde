#pragma once

#include <Eigen/Core>
#include <vector>

#include "scenediff/ddpm.hpp"
#include "scenediff/rng.hpp"

namespace scenediff {

// Everything random in one loss evaluation, drawn up front so losses are
// deterministic functions of (params, draw) and finite differences work.
struct DiffusionDraw {
  std::vector<int> t;        // 1-based timestep per example
  Eigen::MatrixXd noise;     // (batch * rows) x cols
  std::vector<char> uncond;  // drop conditioning per example
};

DiffusionDraw make_draw(int batch, int rows, int cols, const ddpm::NoiseSchedule& sched,
                        double p_uncond, Rng& rng);

// Sinusoidal embedding of integer timesteps, one row per example; dim must
// be even (half sine, half cosine, log-spaced frequencies).
Eigen::MatrixXd time_embedding(const std::vector<int>& t, int dim);

struct TrainConfig {
  int steps = 400;
  int batch_size = 16;
  double lr = 1e-3;
  int lr_halve_every = 0;  // optimizer steps between halvings; 0 disables
  double p_uncond = 0.1;   // stage one only
};

struct TrainLogRow {
  long step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

}  // namespace scenediff
