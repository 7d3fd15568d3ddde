#include "scenediff/ddpm.hpp"

#include <cmath>
#include <string>

#include "scenediff/common.hpp"

namespace scenediff {
namespace ddpm {

NoiseSchedule NoiseSchedule::linear(int T, double beta_start, double beta_end) {
  check(T >= 1, "NoiseSchedule: T must be >= 1");
  check(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end,
        "NoiseSchedule: betas must satisfy 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  s.alpha.resize(T);
  s.alpha_bar.resize(T);
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    const double frac = (T == 1) ? 0.0 : static_cast<double>(i) / (T - 1);
    s.beta(i) = beta_start + (beta_end - beta_start) * frac;
    s.alpha(i) = 1.0 - s.beta(i);
    prod *= s.alpha(i);
    s.alpha_bar(i) = prod;
  }
  s.validate();
  return s;
}

void NoiseSchedule::validate() const {
  check(T >= 1 && beta.size() == T && alpha.size() == T && alpha_bar.size() == T,
        "NoiseSchedule: inconsistent sizes");
  for (int i = 0; i < T; ++i) {
    check(beta(i) > 0.0 && beta(i) < 1.0, "NoiseSchedule: beta out of (0,1)");
    if (i > 0) {
      check(beta(i) >= beta(i - 1), "NoiseSchedule: beta must be non-decreasing");
      check(alpha_bar(i) < alpha_bar(i - 1), "NoiseSchedule: alpha_bar must decrease");
    }
    check(alpha_bar(i) > 0.0 && alpha_bar(i) <= 1.0, "NoiseSchedule: alpha_bar out of (0,1]");
  }
}

static void check_step(int t, const NoiseSchedule& sched, const char* who) {
  check(t >= 1 && t <= sched.T, std::string(who) + ": step out of range");
}

Eigen::MatrixXd q_sample(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& noise,
                         const NoiseSchedule& sched) {
  check_step(t, sched, "q_sample");
  check(x0.rows() == noise.rows() && x0.cols() == noise.cols(),
        "q_sample: x0/noise shape mismatch");
  const double ab = sched.alpha_bar_at(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

Eigen::MatrixXd reconstruct_x0(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat,
                               int t, const NoiseSchedule& sched) {
  check_step(t, sched, "reconstruct_x0");
  check(x_t.rows() == eps_hat.rows() && x_t.cols() == eps_hat.cols(),
        "reconstruct_x0: shape mismatch");
  const double ab = sched.alpha_bar_at(t);
  return (x_t - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
}

Eigen::MatrixXd p_sample_step(const Eigen::MatrixXd& x_t, const Eigen::MatrixXd& eps_hat,
                              int t, const NoiseSchedule& sched, Rng& rng) {
  check_step(t, sched, "p_sample_step");
  check(x_t.rows() == eps_hat.rows() && x_t.cols() == eps_hat.cols(),
        "p_sample_step: shape mismatch");
  const double beta = sched.beta_at(t);
  const double alpha = sched.alpha_at(t);
  const double ab_t = sched.alpha_bar_at(t);
  const double ab_prev = sched.alpha_bar_at(t - 1);

  Eigen::MatrixXd mean =
      (x_t - beta / std::sqrt(1.0 - ab_t) * eps_hat) / std::sqrt(alpha);
  if (t == 1) return mean;

  const double var = (1.0 - ab_prev) / (1.0 - ab_t) * beta;
  const double sigma = std::sqrt(var);
  Eigen::MatrixXd z(x_t.rows(), x_t.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = rng.normal();
  return mean + sigma * z;
}

static void apply_lock(Eigen::MatrixXd& x, const ColumnLock& lock) {
  check(static_cast<Eigen::Index>(lock.columns.size()) == x.cols(),
        "ColumnLock: flag count does not match column count");
  check(lock.values.rows() == x.rows() && lock.values.cols() == x.cols(),
        "ColumnLock: value shape mismatch");
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (lock.columns[static_cast<size_t>(j)]) x.col(j) = lock.values.col(j);
}

Eigen::MatrixXd sample_loop(const Denoiser& denoiser, int rows, int cols,
                            const NoiseSchedule& sched, Rng& rng,
                            const std::optional<ColumnLock>& lock) {
  check(rows > 0 && cols > 0, "sample_loop: empty shape");
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = rng.normal();
  if (lock) apply_lock(x, *lock);

  for (int t = sched.T; t >= 1; --t) {
    Eigen::MatrixXd eps_hat = denoiser(x, t);
    check(eps_hat.rows() == x.rows() && eps_hat.cols() == x.cols(),
          "sample_loop: denoiser returned wrong shape");
    x = p_sample_step(x, eps_hat, t, sched, rng);
    if (lock) apply_lock(x, *lock);
    if (!x.allFinite())
      fail("sample_loop: non-finite state after step t=" + std::to_string(t));
  }
  return x;
}

}  // namespace ddpm
}  // namespace scenediff
