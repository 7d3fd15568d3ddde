#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "scenediff/geometry.hpp"
#include "scenediff/nn/tensor.hpp"
#include "scenediff/rng.hpp"
#include "scenediff/scene.hpp"

namespace testutil {

using scenediff::ObjectInstance;
using scenediff::Room;
using scenediff::RotatedBox3D;
using scenediff::Rng;

inline RotatedBox3D random_box(Rng& rng, double center_span = 1.0,
                               double size_lo = 0.2, double size_hi = 1.0) {
  RotatedBox3D b;
  for (int i = 0; i < 3; ++i) {
    b.center(i) = rng.uniform(-center_span, center_span);
    b.half_extents(i) = rng.uniform(size_lo, size_hi);
  }
  b.yaw = rng.uniform(-M_PI, M_PI);
  return b;
}

inline bool point_in_box(const RotatedBox3D& b, const Eigen::Vector3d& p) {
  const double dx = p.x() - b.center.x();
  const double dy = p.y() - b.center.y();
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::abs(lx) <= b.half_extents.x() && std::abs(ly) <= b.half_extents.y() &&
         std::abs(p.z() - b.center.z()) <= b.half_extents.z();
}

// Ratio-of-counts estimator over the joint bounding box. Returns exact 0 when
// the sampled union is empty.
inline double monte_carlo_iou(const RotatedBox3D& a, const RotatedBox3D& b,
                              int samples, Rng& rng) {
  Eigen::Vector3d lo, hi;
  for (int i = 0; i < 3; ++i) {
    const double ra = std::hypot(a.half_extents.x(), a.half_extents.y());
    const double rb = std::hypot(b.half_extents.x(), b.half_extents.y());
    const double la =
        (i < 2) ? a.center(i) - ra : a.center(i) - a.half_extents(i);
    const double lb = (i < 2) ? b.center(i) - rb : b.center(i) - b.half_extents(i);
    const double ha = (i < 2) ? a.center(i) + ra : a.center(i) + a.half_extents(i);
    const double hb = (i < 2) ? b.center(i) + rb : b.center(i) + b.half_extents(i);
    lo(i) = std::min(la, lb);
    hi(i) = std::max(ha, hb);
  }
  long long inter = 0, uni = 0;
  for (int k = 0; k < samples; ++k) {
    Eigen::Vector3d p;
    for (int i = 0; i < 3; ++i) p(i) = rng.uniform(lo(i), hi(i));
    const bool ia = point_in_box(a, p);
    const bool ib = point_in_box(b, p);
    if (ia && ib) ++inter;
    if (ia || ib) ++uni;
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline ObjectInstance make_object(const std::string& category,
                                  const Eigen::Vector3d& half,
                                  const Eigen::Vector3d& loc, double yaw) {
  ObjectInstance o;
  o.category = category;
  o.half_size = half;
  o.location = loc;
  o.yaw = yaw;
  return o;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

// Overwrites every parameter with small random values; zero-initialized
// output heads would otherwise hide gradient paths from the checks below.
inline void randomize_params(scenediff::nn::ParamStore& params, Rng& rng,
                             double scale = 0.3) {
  for (const auto& [name, tensor] : params.items()) {
    Eigen::MatrixXd v(tensor->value.rows(), tensor->value.cols());
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      for (Eigen::Index c = 0; c < v.cols(); ++c) v(r, c) = rng.normal(0.0, scale);
    params.set_value(name, v);
  }
}

// Richardson-extrapolated central differences over every scalar of every
// parameter. Returns the worst relative error among entries where either
// side is above atol.
inline double fd_worst_rel_error(scenediff::nn::ParamStore& params,
                                 const std::function<scenediff::nn::Tensor()>& loss_fn,
                                 double h_scale = 1e-4, double atol = 1e-8) {
  params.zero_grad();
  const scenediff::nn::Tensor loss = loss_fn();
  scenediff::nn::backward(loss);

  auto eval = [&]() {
    scenediff::nn::NoGradGuard guard;
    return loss_fn()->value(0, 0);
  };

  double worst = 0.0;
  for (const auto& [name, tensor] : params.items()) {
    const Eigen::MatrixXd analytic = tensor->grad.size() > 0
                                         ? tensor->grad
                                         : Eigen::MatrixXd::Zero(tensor->value.rows(),
                                                                 tensor->value.cols());
    for (Eigen::Index r = 0; r < tensor->value.rows(); ++r)
      for (Eigen::Index c = 0; c < tensor->value.cols(); ++c) {
        const double saved = tensor->value(r, c);
        const double h = h_scale * std::max(1.0, std::abs(saved));
        auto central = [&](double step) {
          tensor->value(r, c) = saved + step;
          const double up = eval();
          tensor->value(r, c) = saved - step;
          const double down = eval();
          tensor->value(r, c) = saved;
          return (up - down) / (2.0 * step);
        };
        // two step sizes extrapolate away the h^2 truncation term
        const double fd = (4.0 * central(0.5 * h) - central(h)) / 3.0;
        const double an = analytic(r, c);
        if (std::abs(fd) < atol && std::abs(an) < atol) continue;
        worst = std::max(worst, rel_err(an, fd));
      }
  }
  return worst;
}

}  // namespace testutil
