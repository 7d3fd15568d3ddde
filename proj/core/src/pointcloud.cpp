#include "scenediff/pointcloud.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "scenediff/common.hpp"
#include "scenediff/rng.hpp"

namespace scenediff {

std::array<std::uint8_t, 3> category_color(const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::array<std::uint8_t, 3> rgb;
  for (int i = 0; i < 3; ++i) {
    rgb[i] = static_cast<std::uint8_t>(64 + ((h >> (i * 8)) & 0xff) % 192);
  }
  return rgb;
}

LabeledPointCloud sample_pointcloud(const Room& room, const frs::FurnitureDatabase& db,
                                    int points_per_object, std::uint64_t seed) {
  check(points_per_object > 0, "sample_pointcloud: need a positive point budget");
  LabeledPointCloud cloud;
  std::set<std::string> categories;
  for (const ObjectInstance& obj : room.objects) categories.insert(obj.category);
  cloud.label_names.assign(categories.begin(), categories.end());
  auto label_of = [&](const std::string& name) {
    return static_cast<int>(std::lower_bound(cloud.label_names.begin(), cloud.label_names.end(),
                                             name) -
                            cloud.label_names.begin());
  };

  cloud.points.reserve(room.objects.size() * static_cast<size_t>(points_per_object));
  for (size_t i = 0; i < room.objects.size(); ++i) {
    const ObjectInstance& obj = room.objects[i];
    const frs::RetrievalResult hit = frs::retrieve(obj.half_size, obj.category, db);
    const frs::FurnitureEntry& entry = db.entry_by_id(hit.id);
    check(entry.mesh >= 0, "sample_pointcloud: object " + std::to_string(i) + " (" +
                               obj.category + ") has no mesh proxy");
    const MeshProxy& mesh = db.meshes[entry.mesh];

    const Eigen::Vector3d scale = obj.half_size.cwiseQuotient(entry.size);
    const Eigen::Rotation2Dd rot(obj.yaw);
    std::vector<Eigen::Vector3d> verts(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
      Eigen::Vector3d p = mesh.vertices[v].cwiseProduct(scale);
      p.head<2>() = rot * p.head<2>();
      verts[v] = p + obj.location;
    }

    // cumulative areas of the transformed triangles drive the face choice
    std::vector<double> cum(mesh.triangles.size());
    double total = 0.0;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      total += 0.5 * (verts[tri[1]] - verts[tri[0]]).cross(verts[tri[2]] - verts[tri[0]]).norm();
      cum[t] = total;
    }
    check(total > 0.0, "sample_pointcloud: degenerate mesh for " + obj.category);

    const int label = label_of(obj.category);
    const auto rgb = category_color(obj.category);
    Rng rng(Rng::mix(Rng::mix(seed, 0x706c7921u), i));
    for (int p = 0; p < points_per_object; ++p) {
      const double pick = rng.uniform(0.0, total);
      const size_t t = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
      const auto& tri = mesh.triangles[std::min(t, mesh.triangles.size() - 1)];
      double u = rng.uniform();
      double v = rng.uniform();
      if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
      }
      LabeledPoint point;
      point.position = verts[tri[0]] + u * (verts[tri[1]] - verts[tri[0]]) +
                       v * (verts[tri[2]] - verts[tri[0]]);
      point.rgb = rgb;
      point.label = label;
      cloud.points.push_back(point);
    }
  }
  return cloud;
}

void save_ply(const LabeledPointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream os(path);
  check(os.good(), "save_ply: cannot open " + path.string());
  os << "ply\nformat ascii 1.0\n";
  for (size_t i = 0; i < cloud.label_names.size(); ++i)
    os << "comment label " << i << " " << cloud.label_names[i] << "\n";
  os << "element vertex " << cloud.points.size() << "\n"
     << "property float x\nproperty float y\nproperty float z\n"
     << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
     << "property int label\nend_header\n";
  char buf[160];
  for (const LabeledPoint& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %d %d %d %d\n", p.position.x(),
                  p.position.y(), p.position.z(), static_cast<int>(p.rgb[0]),
                  static_cast<int>(p.rgb[1]), static_cast<int>(p.rgb[2]), p.label);
    os << buf;
  }
  check(os.good(), "save_ply: write failed for " + path.string());
}

LabeledPointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream is(path);
  check(is.good(), "load_ply: cannot open " + path.string());
  LabeledPointCloud cloud;
  std::string line;
  size_t count = 0;
  bool header_done = false;
  while (!header_done && std::getline(is, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment") {
      std::string tag;
      size_t id;
      std::string name;
      if (ls >> tag >> id >> name && tag == "label") {
        if (cloud.label_names.size() <= id) cloud.label_names.resize(id + 1);
        cloud.label_names[id] = name;
      }
    } else if (word == "element") {
      std::string kind;
      ls >> kind >> count;
      check(kind == "vertex", "load_ply: unexpected element " + kind);
    } else if (word == "end_header") {
      header_done = true;
    }
  }
  check(header_done, "load_ply: missing end_header in " + path.string());
  cloud.points.resize(count);
  for (size_t i = 0; i < count; ++i) {
    LabeledPoint& p = cloud.points[i];
    int r, g, b;
    is >> p.position.x() >> p.position.y() >> p.position.z() >> r >> g >> b >> p.label;
    check(!is.fail(), "load_ply: truncated point data in " + path.string());
    p.rgb = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
             static_cast<std::uint8_t>(b)};
  }
  return cloud;
}

}  // namespace scenediff
