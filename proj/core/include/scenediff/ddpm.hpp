#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

#include "scenediff/rng.hpp"

namespace scenediff {
namespace ddpm {

// DDPM beta/alpha tables. Steps are 1-based: beta(t) for t in [1, T].
struct NoiseSchedule {
  int T = 0;
  Eigen::VectorXd beta;       // T entries
  Eigen::VectorXd alpha;      // 1 - beta
  Eigen::VectorXd alpha_bar;  // cumulative products

  static NoiseSchedule linear(int T, double beta_start = 1e-4, double beta_end = 0.02);

  double beta_at(int t) const { return beta(t - 1); }
  double alpha_at(int t) const { return alpha(t - 1); }
  // alpha_bar extended with alpha_bar(0) = 1, floored to keep divisions finite.
  double alpha_bar_at(int t) const {
    if (t == 0) return 1.0;
    return std::max(alpha_bar(t - 1), 1e-12);
  }
  double snr_at(int t) const {
    const double ab = alpha_bar_at(t);
    return std::sqrt(ab / (1.0 - ab));
  }
  void validate() const;
};

// Forward corruption: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise.
Eigen::MatrixXd q_sample(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& noise,
                         const NoiseSchedule& sched);

// Clean-sample estimate: x0 = (x_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t).
Eigen::MatrixXd reconstruct_x0(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat,
                               int t, const NoiseSchedule& sched);

// One ancestral step with posterior variance beta-tilde; no noise at t = 1.
Eigen::MatrixXd p_sample_step(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat,
                              int t, const NoiseSchedule& sched, Rng& rng);

// Columns overwritten with fixed values after every sampling step (stage two
// keeps size and category locked).
struct ColumnLock {
  std::vector<bool> columns;  // one flag per column
  Eigen::MatrixXd values;     // full-shape matrix; locked columns are read from it
};

using Denoiser = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x_t, int t)>;

// Ancestral sampling from pure noise at t = T down to t = 1. Aborts with the
// failing step index if an intermediate goes non-finite.
Eigen::MatrixXd sample_loop(const Denoiser& denoiser, int rows, int cols,
                            const NoiseSchedule& sched, Rng& rng,
                            const std::optional<ColumnLock>& lock = std::nullopt);

}  // namespace ddpm
}  // namespace scenediff
