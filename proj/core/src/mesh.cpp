#include "scenediff/mesh.hpp"

#include <Eigen/Geometry>

#include "scenediff/common.hpp"

namespace scenediff {

namespace {

// Appends a closed box spanning [lo, hi] with outward winding.
void append_box(MeshProxy& mesh, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  const int base = static_cast<int>(mesh.vertices.size());
  for (int i = 0; i < 8; ++i)
    mesh.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                               i & 4 ? hi.z() : lo.z());
  // Two triangles per face; vertex bit layout is x=1, y=2, z=4.
  static constexpr int faces[6][4] = {
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
  };
  for (const auto& f : faces) {
    mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
    mesh.triangles.push_back({base + f[0], base + f[2], base + f[3]});
  }
}

}  // namespace

double MeshProxy::triangle_area(int i) const {
  const auto& t = triangles[i];
  const Eigen::Vector3d a = vertices[t[0]], b = vertices[t[1]], c = vertices[t[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

double MeshProxy::total_area() const {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(triangles.size()); ++i) total += triangle_area(i);
  return total;
}

void MeshProxy::validate() const {
  const int n = static_cast<int>(vertices.size());
  for (const auto& t : triangles)
    check(t[0] >= 0 && t[0] < n && t[1] >= 0 && t[1] < n && t[2] >= 0 && t[2] < n,
          "MeshProxy: triangle index out of range");
  check(!triangles.empty() && total_area() > 0.0, "MeshProxy: zero surface area");
}

MeshProxy box_mesh(const Eigen::Vector3d& half, const std::string& category) {
  check((half.array() > 0.0).all(), "box_mesh: non-positive half extent");
  MeshProxy mesh;
  mesh.category = category;
  append_box(mesh, -half, half);
  mesh.validate();
  return mesh;
}

MeshProxy table_mesh(const Eigen::Vector3d& half, const std::string& category) {
  check((half.array() > 0.0).all(), "table_mesh: non-positive half extent");
  MeshProxy mesh;
  mesh.category = category;
  const double top_thickness = 0.2 * (2.0 * half.z());
  const double slab_bottom = half.z() - top_thickness;
  append_box(mesh, {-half.x(), -half.y(), slab_bottom}, half);
  const double leg = 0.12 * std::min(half.x(), half.y()) * 2.0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      const double cx = sx * (half.x() - 0.5 * leg);
      const double cy = sy * (half.y() - 0.5 * leg);
      append_box(mesh, {cx - 0.5 * leg, cy - 0.5 * leg, -half.z()},
                 {cx + 0.5 * leg, cy + 0.5 * leg, slab_bottom});
    }
  mesh.validate();
  return mesh;
}

}  // namespace scenediff
