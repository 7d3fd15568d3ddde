#include <doctest.h>

#include <Eigen/Geometry>
#include <filesystem>
#include <set>

#include "helpers.hpp"
#include "scenediff/common.hpp"
#include "scenediff/corpus.hpp"
#include "scenediff/pointcloud.hpp"

using namespace scenediff;
using testutil::make_object;

namespace {

frs::FurnitureDatabase cube_db() {
  std::vector<frs::FurnitureEntry> entries = {{1, "crate", {0.5, 0.5, 0.5}, 0},
                                              {2, "slab", {0.8, 0.6, 0.1}, 1}};
  std::vector<MeshProxy> meshes = {box_mesh({0.5, 0.5, 0.5}, "crate"),
                                   box_mesh({0.8, 0.6, 0.1}, "slab")};
  return frs::build_index(entries, meshes, {});
}

}  // namespace

TEST_SUITE_BEGIN("pointcloud");

TEST_CASE("point budget, labels, and colors") {
  const auto db = cube_db();
  Room room;
  room.room_type = "storeroom";
  room.objects = {make_object("slab", {0.8, 0.6, 0.1}, {1.0, 0.0, 0.1}, 0.4),
                  make_object("crate", {0.5, 0.5, 0.5}, {-1.0, 0.5, 0.5}, 0.0)};
  const auto cloud = sample_pointcloud(room, db, 30000, 5);
  CHECK(cloud.points.size() == 60000);
  REQUIRE(cloud.label_names == std::vector<std::string>{"crate", "slab"});

  std::set<int> labels;
  for (const auto& p : cloud.points) labels.insert(p.label);
  CHECK(labels == std::set<int>{0, 1});
  // color is bound to the category and never the background black
  for (const auto& p : cloud.points) {
    CHECK(p.rgb == category_color(cloud.label_names[p.label]));
    CHECK((p.rgb[0] != 0 || p.rgb[1] != 0 || p.rgb[2] != 0));
  }
  CHECK(category_color("crate") != category_color("slab"));

  // same seed, same cloud
  const auto again = sample_pointcloud(room, db, 30000, 5);
  REQUIRE(again.points.size() == cloud.points.size());
  for (size_t i = 0; i < cloud.points.size(); i += 977)
    CHECK(again.points[i].position == cloud.points[i].position);

  CHECK_THROWS_AS(sample_pointcloud(room, db, 0, 5), Error);
}

TEST_CASE("faces of a cube are hit in proportion to their area") {
  const auto db = cube_db();
  Room room;
  room.room_type = "storeroom";
  room.objects = {make_object("crate", {0.5, 0.5, 0.5}, {0.0, 0.0, 0.5}, 0.0)};
  const auto cloud = sample_pointcloud(room, db, 30000, 2);
  REQUIRE(cloud.points.size() == 30000);

  long face_count[6] = {0, 0, 0, 0, 0, 0};
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d local = p.position - Eigen::Vector3d(0.0, 0.0, 0.5);
    int face = -1;
    if (std::abs(local.x() + 0.5) < 1e-9) face = 0;
    else if (std::abs(local.x() - 0.5) < 1e-9) face = 1;
    else if (std::abs(local.y() + 0.5) < 1e-9) face = 2;
    else if (std::abs(local.y() - 0.5) < 1e-9) face = 3;
    else if (std::abs(local.z() + 0.5) < 1e-9) face = 4;
    else if (std::abs(local.z() - 0.5) < 1e-9) face = 5;
    REQUIRE(face >= 0);
    ++face_count[face];
  }
  for (const long count : face_count) {
    const double fraction = static_cast<double>(count) / 30000.0;
    CHECK(std::abs(fraction - 1.0 / 6.0) < 0.02 / 6.0);
  }
}

TEST_CASE("every point lies on a transformed triangle") {
  const auto db = cube_db();
  Room room;
  room.room_type = "storeroom";
  room.objects = {make_object("slab", {0.4, 0.3, 0.05}, {0.7, -0.2, 0.35}, 1.1)};
  const auto cloud = sample_pointcloud(room, db, 2000, 9);

  // rebuild the transformed proxy the sampler used
  const auto& entry = db.entries[db.bucket("slab")[0]];
  const auto& mesh = db.meshes[entry.mesh];
  const ObjectInstance& obj = room.objects[0];
  const Eigen::Vector3d scale = obj.half_size.cwiseQuotient(entry.size);
  const Eigen::Rotation2Dd rot(obj.yaw);
  std::vector<Eigen::Vector3d> verts(mesh.vertices.size());
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    Eigen::Vector3d p = mesh.vertices[v].cwiseProduct(scale);
    p.head<2>() = rot * p.head<2>();
    verts[v] = p + obj.location;
  }

  for (const auto& point : cloud.points) {
    bool on_surface = false;
    for (const auto& tri : mesh.triangles) {
      const Eigen::Vector3d a = verts[tri[0]], b = verts[tri[1]], c = verts[tri[2]];
      const Eigen::Vector3d n = (b - a).cross(c - a);
      if (std::abs(n.normalized().dot(point.position - a)) > 1e-6) continue;
      // barycentric containment in the triangle plane
      const Eigen::Vector3d v0 = b - a, v1 = c - a, v2 = point.position - a;
      const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
      const double d20 = v2.dot(v0), d21 = v2.dot(v1);
      const double denom = d00 * d11 - d01 * d01;
      const double v = (d11 * d20 - d01 * d21) / denom;
      const double w = (d00 * d21 - d01 * d20) / denom;
      if (v >= -1e-9 && w >= -1e-9 && v + w <= 1.0 + 1e-9) {
        on_surface = true;
        break;
      }
    }
    CHECK(on_surface);
  }
}

TEST_CASE("missing mesh proxies are reported by object") {
  std::vector<frs::FurnitureEntry> entries = {{1, "crate", {0.5, 0.5, 0.5}, -1}};
  const auto db = frs::build_index(entries, {}, {});
  Room room;
  room.room_type = "storeroom";
  room.objects = {make_object("crate", {0.5, 0.5, 0.5}, {0.0, 0.0, 0.5}, 0.0)};
  CHECK_THROWS_WITH_AS(sample_pointcloud(room, db, 100, 1), doctest::Contains("crate"), Error);
}

TEST_CASE("ply round trip") {
  const auto db = cube_db();
  Room room;
  room.room_type = "storeroom";
  room.objects = {make_object("crate", {0.5, 0.5, 0.5}, {0.3, -0.4, 0.5}, 0.2),
                  make_object("slab", {0.8, 0.6, 0.1}, {-0.9, 0.8, 0.1}, -0.7)};
  const auto cloud = sample_pointcloud(room, db, 500, 31);

  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "scenediff_test_cloud.ply";
  save_ply(cloud, path);
  const auto loaded = load_ply(path);
  fs::remove(path);

  CHECK(loaded.label_names == cloud.label_names);
  REQUIRE(loaded.points.size() == cloud.points.size());
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    CHECK((loaded.points[i].position - cloud.points[i].position).norm() < 1e-6);
    CHECK(loaded.points[i].rgb == cloud.points[i].rgb);
    CHECK(loaded.points[i].label == cloud.points[i].label);
  }

  CHECK_THROWS_AS(load_ply(fs::temp_directory_path() / "scenediff_absent.ply"), Error);
}

TEST_SUITE_END();
