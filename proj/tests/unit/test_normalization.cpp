#include <doctest.h>

#include "helpers.hpp"
#include "scenediff/common.hpp"
#include "scenediff/normalization.hpp"

using namespace scenediff;

TEST_SUITE("normalization") {

TEST_CASE("fit covers the corpus and round-trips within 1e-9") {
  Rng rng(3);
  std::vector<Room> rooms(4);
  for (auto& r : rooms)
    for (int i = 0; i < 5; ++i)
      r.objects.push_back(testutil::make_object(
          "x", {rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.8)},
          {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 1.5)},
          rng.uniform(-3, 3)));
  const auto stats = NormalizationStats::fit(rooms);
  stats.validate();

  for (const auto& r : rooms)
    for (const auto& o : r.objects) {
      const Eigen::Vector3d s = stats.normalize_size(o.half_size);
      const Eigen::Vector3d l = stats.normalize_location(o.location);
      for (int i = 0; i < 3; ++i) {
        CHECK(s(i) >= -1.0 - 1e-12);
        CHECK(s(i) <= 1.0 + 1e-12);
        CHECK(l(i) >= -1.0 - 1e-12);
        CHECK(l(i) <= 1.0 + 1e-12);
      }
      CHECK((stats.denormalize_size(s) - o.half_size).norm() < 1e-9);
      CHECK((stats.denormalize_location(l) - o.location).norm() < 1e-9);
    }
}

TEST_CASE("normalization endpoints map to -1 and +1") {
  std::vector<Room> rooms(1);
  rooms[0].objects.push_back(testutil::make_object("x", {0.2, 0.3, 0.4}, {0, 0, 0.4}, 0));
  rooms[0].objects.push_back(testutil::make_object("x", {0.6, 0.9, 0.8}, {1, 2, 0.8}, 0));
  const auto stats = NormalizationStats::fit(rooms);
  const Eigen::Vector3d lo = stats.normalize_size({0.2, 0.3, 0.4});
  const Eigen::Vector3d hi = stats.normalize_size({0.6, 0.9, 0.8});
  for (int i = 0; i < 3; ++i) {
    CHECK(lo(i) == doctest::Approx(-1.0));
    CHECK(hi(i) == doctest::Approx(1.0));
  }
}

TEST_CASE("degenerate axes are widened so min stays below max") {
  std::vector<Room> rooms(1);
  rooms[0].objects.push_back(testutil::make_object("x", {0.5, 0.5, 0.5}, {1, 1, 1}, 0));
  rooms[0].objects.push_back(testutil::make_object("x", {0.5, 0.5, 0.5}, {1, 1, 1}, 0));
  const auto stats = NormalizationStats::fit(rooms);
  stats.validate();
  for (int i = 0; i < 3; ++i) {
    CHECK(stats.size_max(i) > stats.size_min(i));
    CHECK(stats.loc_max(i) > stats.loc_min(i));
  }
  // the shared value stays representable
  CHECK((stats.denormalize_size(stats.normalize_size({0.5, 0.5, 0.5})) -
         Eigen::Vector3d(0.5, 0.5, 0.5))
            .norm() < 1e-9);
}

TEST_CASE("validate rejects inverted ranges") {
  NormalizationStats s;
  s.size_min = Eigen::Vector3d(1, 0, 0);
  s.size_max = Eigen::Vector3d(0.5, 1, 1);
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("fit requires at least one object") {
  std::vector<Room> rooms;
  CHECK_THROWS_AS(NormalizationStats::fit(rooms), Error);
}

}  // TEST_SUITE
