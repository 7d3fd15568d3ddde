#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "scenediff/common.hpp"
#include "scenediff/frs.hpp"
#include "scenediff/mesh.hpp"

using namespace scenediff;
using frs::FurnitureEntry;

namespace {

std::vector<FurnitureEntry> sample_entries() {
  return {
      {4, "chair", {0.3, 0.3, 0.5}, -1},  {1, "desk", {0.8, 0.5, 0.4}, -1},
      {2, "desk", {0.6, 0.4, 0.38}, -1},  {7, "lamp", {0.1, 0.1, 0.25}, -1},
      {3, "chair", {0.25, 0.28, 0.45}, -1},
  };
}

}  // namespace

TEST_SUITE_BEGIN("frs");

TEST_CASE("box mesh is a closed box with the exact surface area") {
  const Eigen::Vector3d half(0.4, 0.3, 0.2);
  const MeshProxy mesh = box_mesh(half, "desk");
  CHECK(mesh.vertices.size() == 8);
  CHECK(mesh.triangles.size() == 12);
  const double expect = 8.0 * (half.x() * half.y() + half.y() * half.z() +
                               half.x() * half.z());
  CHECK(mesh.total_area() == doctest::Approx(expect).epsilon(1e-12));
  for (const auto& v : mesh.vertices) {
    CHECK(std::abs(v.x()) <= half.x() + 1e-12);
    CHECK(std::abs(v.y()) <= half.y() + 1e-12);
    CHECK(std::abs(v.z()) <= half.z() + 1e-12);
  }
  CHECK_THROWS_AS(box_mesh({0.0, 0.3, 0.2}, "desk"), Error);
}

TEST_CASE("table mesh stays inside its envelope") {
  const Eigen::Vector3d half(0.7, 0.4, 0.37);
  const MeshProxy mesh = table_mesh(half, "desk");
  CHECK(mesh.total_area() > 0.0);
  CHECK(mesh.triangles.size() == 5 * 12);
  for (const auto& v : mesh.vertices) {
    CHECK(std::abs(v.x()) <= half.x() + 1e-12);
    CHECK(std::abs(v.y()) <= half.y() + 1e-12);
    CHECK(std::abs(v.z()) <= half.z() + 1e-12);
  }
}

TEST_CASE("mesh validation rejects bad indices and empty surfaces") {
  MeshProxy mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.triangles = {{0, 1, 3}};
  CHECK_THROWS_AS(mesh.validate(), Error);
  mesh.triangles.clear();
  CHECK_THROWS_AS(mesh.validate(), Error);
}

TEST_CASE("index construction") {
  const auto db = frs::build_index(sample_entries());
  CHECK(db.by_category.size() == 3);
  size_t total = 0;
  for (const auto& [category, bucket] : db.by_category) {
    total += bucket.size();
    for (size_t i = 1; i < bucket.size(); ++i)
      CHECK(db.entries[bucket[i - 1]].id < db.entries[bucket[i]].id);
  }
  CHECK(total == db.entries.size());

  // single entry
  const auto one = frs::build_index({{1, "desk", {0.5, 0.5, 0.5}, -1}});
  CHECK(one.by_category.size() == 1);
  CHECK(one.bucket("desk").size() == 1);

  // entry order does not matter
  auto reversed = sample_entries();
  std::reverse(reversed.begin(), reversed.end());
  const auto db2 = frs::build_index(reversed);
  for (const auto& [category, bucket] : db.by_category) {
    const auto& other = db2.bucket(category);
    REQUIRE(bucket.size() == other.size());
    for (size_t i = 0; i < bucket.size(); ++i)
      CHECK(db.entries[bucket[i]].id == db2.entries[other[i]].id);
  }

  auto dup = sample_entries();
  dup.push_back({4, "desk", {0.5, 0.5, 0.5}, -1});
  CHECK_THROWS_WITH_AS(frs::build_index(dup), doctest::Contains("duplicate id 4"), Error);

  CHECK_THROWS_AS(frs::build_index({}), Error);
  CHECK_THROWS_AS(frs::build_index({{1, "desk", {0.0, 0.5, 0.5}, -1}}), Error);
}

TEST_CASE("retrieval basics") {
  const auto db = frs::build_index(sample_entries());

  // an exact size hits its own entry
  const auto exact = frs::retrieve({0.6, 0.4, 0.38}, "desk", db);
  CHECK(exact.id == 2);
  CHECK(exact.size == Eigen::Vector3d(0.6, 0.4, 0.38));
  CHECK(exact.category == "desk");

  // single-entry category ignores the query
  const auto lamp = frs::retrieve({9.0, 9.0, 9.0}, "lamp", db);
  CHECK(lamp.id == 7);

  CHECK_THROWS_WITH_AS(frs::retrieve({0.5, 0.5, 0.5}, "sofa", db),
                       doctest::Contains("sofa"), Error);
}

TEST_CASE("equidistant entries resolve to the smallest id") {
  const auto db = frs::build_index({{9, "desk", {0.4, 0.4, 0.4}, -1},
                                    {5, "desk", {0.6, 0.4, 0.4}, -1}});
  // query halfway between the two sizes
  CHECK(frs::retrieve({0.5, 0.4, 0.4}, "desk", db).id == 5);
}

TEST_CASE("retrieval matches a brute-force scan") {
  const auto db = frs::build_index(sample_entries());
  const std::vector<std::string> categories = {"desk", "chair", "lamp"};
  Rng rng(321);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string& category = categories[rng.uniform_int(0, 2)];
    const Eigen::Vector3d q(rng.uniform(0.05, 1.2), rng.uniform(0.05, 1.2),
                            rng.uniform(0.05, 1.2));
    int best_id = -1;
    double best = 0.0;
    for (const auto& e : db.entries) {
      if (e.category != category) continue;
      const double d = (e.size - q).norm();
      if (best_id < 0 || d < best || (d == best && e.id < best_id)) {
        best_id = e.id;
        best = d;
      }
    }
    const auto got = frs::retrieve(q, category, db);
    CHECK(got.id == best_id);
    // retrieved distance is minimal
    for (const auto& e : db.entries)
      if (e.category == category)
        CHECK((got.size - q).norm() <= (e.size - q).norm() + 1e-15);
  }
}

TEST_CASE("retrieval is scale consistent") {
  const double factor = 2.5;
  auto scaled_entries = sample_entries();
  for (auto& e : scaled_entries) e.size *= factor;
  const auto db = frs::build_index(sample_entries());
  const auto scaled = frs::build_index(scaled_entries);
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d q(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0),
                            rng.uniform(0.05, 1.0));
    CHECK(frs::retrieve(q, "desk", db).id == frs::retrieve(q * factor, "desk", scaled).id);
  }
}

TEST_CASE("database round trip") {
  std::vector<MeshProxy> meshes = {box_mesh({0.3, 0.3, 0.5}, "chair"),
                                   table_mesh({0.8, 0.5, 0.4}, "desk")};
  auto entries = sample_entries();
  entries[0].mesh = 0;
  entries[1].mesh = 1;
  std::map<std::string, frs::CategoryFlags> flags = {{"lamp", {true, true}},
                                                     {"desk", {false, true}}};
  const auto db = frs::build_index(entries, meshes, flags);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scenediff_test_frsdb";
  fs::remove_all(dir);
  frs::save_database(db, dir);
  const auto loaded = frs::load_database(dir);

  REQUIRE(loaded.entries.size() == db.entries.size());
  CHECK(loaded.category_flags.at("lamp").deletable);
  CHECK_FALSE(loaded.category_flags.at("desk").deletable);
  CHECK(loaded.category_flags.at("desk").replaceable);

  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d q(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0),
                            rng.uniform(0.05, 1.0));
    CHECK(frs::retrieve(q, "chair", db).id == frs::retrieve(q, "chair", loaded).id);
  }
  const auto& chair = loaded.entry_by_id(4);
  REQUIRE(chair.mesh >= 0);
  CHECK(loaded.meshes[chair.mesh].total_area() ==
        doctest::Approx(meshes[0].total_area()).epsilon(1e-12));
  fs::remove_all(dir);
}

TEST_SUITE_END();
