#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace scenediff {

// Triangle soup for one furniture item, vertices in the object-local frame
// (origin at the box center, +y facing front at yaw 0). Proxies are either a
// single closed box or a small composite of boxes.
struct MeshProxy {
  std::string category;
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  double triangle_area(int i) const;
  double total_area() const;
  void validate() const;  // indices in range, nonzero total area
};

// Axis-aligned closed box spanning [-half, +half] per axis, 12 triangles,
// outward-facing winding.
MeshProxy box_mesh(const Eigen::Vector3d& half, const std::string& category);

// Table-like composite: a top slab carried by four corner legs, all within
// the same [-half, +half] envelope.
MeshProxy table_mesh(const Eigen::Vector3d& half, const std::string& category);

}  // namespace scenediff
