#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "scenediff/normalization.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {

// Axis conventions: z is up, y is the front direction at yaw 0, yaw rotates
// counterclockwise about +z.
struct RotatedBox3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Ones();
  double yaw = 0.0;

  std::array<Eigen::Vector3d, 8> corners() const;
  std::array<Eigen::Vector2d, 4> footprint() const;  // counterclockwise
  double volume() const { return 8.0 * half_extents.prod(); }

  static RotatedBox3D of(const ObjectInstance& obj) {
    return RotatedBox3D{obj.location, obj.half_size, obj.yaw};
  }
};

// Exact IoU of two yaw-rotated boxes: 2D convex-polygon footprint
// intersection (Sutherland-Hodgman clipping) times the vertical interval
// overlap, over the union volume. Throws on zero-volume boxes.
double rotated_iou_3d(const RotatedBox3D& a, const RotatedBox3D& b);

// Sum of rotated_iou_3d over all unordered object pairs; 0 for n <= 1.
double pairwise_scene_iou(const Room& room);

// Exposed for tests and the rasterizer.
double convex_polygon_area(const std::vector<Eigen::Vector2d>& poly);
std::vector<Eigen::Vector2d> convex_clip(const std::vector<Eigen::Vector2d>& subject,
                                         const std::vector<Eigen::Vector2d>& clip);

// Smoothed, differentiable overlap surrogate used by the layout training
// penalty. Inputs are one box pair's normalized location (3) and rotation (2)
// values plus the locked half-extents in meters; returns the surrogate IoU
// and its gradient with respect to the ten normalized inputs (box a then b).
// The footprint term is the exact clipped polygon area; the vertical term
// uses softplus-smoothed min/max with the given sharpness.
struct PairOverlap {
  double value = 0.0;
  Eigen::Matrix<double, 10, 1> grad = Eigen::Matrix<double, 10, 1>::Zero();
};
PairOverlap smooth_pair_overlap(const Eigen::Matrix<double, 5, 1>& lr_a,
                                const Eigen::Matrix<double, 5, 1>& lr_b,
                                const Eigen::Vector3d& half_a,
                                const Eigen::Vector3d& half_b,
                                const NormalizationStats& stats,
                                double sharpness = 50.0);

}  // namespace scenediff
