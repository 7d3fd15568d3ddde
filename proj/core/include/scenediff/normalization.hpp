#pragma once

#include <Eigen/Core>
#include <span>

#include "scenediff/scene.hpp"

namespace scenediff {

// Per-attribute min/max over a training corpus, used to map sizes and
// locations into [-1, 1] so every attribute shares the same range.
struct NormalizationStats {
  Eigen::Vector3d size_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d size_max = Eigen::Vector3d::Ones();
  Eigen::Vector3d loc_min = -Eigen::Vector3d::Ones();
  Eigen::Vector3d loc_max = Eigen::Vector3d::Ones();

  // Fits min/max over all objects of the given rooms (the training split).
  // Axes whose span collapses below min_span are symmetrically widened so the
  // componentwise min < max invariant always holds.
  static NormalizationStats fit(std::span<const Room> rooms, double min_span = 1e-3);

  Eigen::Vector3d normalize_size(const Eigen::Vector3d& v) const;
  Eigen::Vector3d denormalize_size(const Eigen::Vector3d& v) const;
  Eigen::Vector3d normalize_location(const Eigen::Vector3d& v) const;
  Eigen::Vector3d denormalize_location(const Eigen::Vector3d& v) const;

  void validate() const;  // min < max componentwise
};

}  // namespace scenediff
