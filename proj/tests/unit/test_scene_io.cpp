#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "scenediff/common.hpp"
#include "scenediff/scene_io.hpp"

#include <nlohmann/json.hpp>

using namespace scenediff;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("scenediff_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Room sample_room() {
  Room r;
  r.room_id = "r42";
  r.room_type = "bedroom";
  r.objects.push_back(testutil::make_object("bed", {1.0, 0.9, 0.25}, {0.5, -0.25, 0.25}, 1.25));
  r.objects.push_back(testutil::make_object("lamp", {0.05, 0.05, 0.2}, {1.5, 1.0, 0.9}, -0.5));
  return r;
}

}  // namespace

TEST_SUITE("scene_io") {

TEST_CASE("room JSON schema and round trip") {
  const Room r = sample_room();
  const nlohmann::json j = room_to_json(r);
  CHECK(j.at("room_id") == "r42");
  CHECK(j.at("room_type") == "bedroom");
  REQUIRE(j.at("objects").size() == 2);
  CHECK(j["objects"][0].at("class") == "bed");
  CHECK(j["objects"][0].at("size").size() == 3);
  CHECK(j["objects"][0].at("location").size() == 3);
  CHECK(j["objects"][0].at("yaw") == doctest::Approx(1.25));

  const Room back = room_from_json(j);
  REQUIRE(back.size() == r.size());
  for (int i = 0; i < r.size(); ++i) {
    CHECK(back.objects[i].category == r.objects[i].category);
    CHECK((back.objects[i].half_size - r.objects[i].half_size).norm() == 0.0);
    CHECK((back.objects[i].location - r.objects[i].location).norm() == 0.0);
    CHECK(back.objects[i].yaw == r.objects[i].yaw);
  }
}

TEST_CASE("file round trip is byte-stable") {
  const auto dir = temp_dir("room");
  const Room r = sample_room();
  save_room(r, dir / "a.json");
  save_room(load_room(dir / "a.json"), dir / "b.json");

  std::ifstream fa(dir / "a.json"), fb(dir / "b.json");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(!sa.empty());
  fs::remove_all(dir);
}

TEST_CASE("corpus split save/load preserves rooms in id order") {
  const auto dir = temp_dir("split");
  std::vector<Room> rooms;
  for (int i = 0; i < 5; ++i) {
    Room r = sample_room();
    r.room_id = "room_" + std::to_string(i);
    r.objects[0].location.x() = i;
    rooms.push_back(r);
  }
  save_corpus_split(rooms, dir / "train");
  const auto loaded = load_corpus_split(dir / "train");
  REQUIRE(loaded.size() == rooms.size());
  for (size_t i = 0; i < rooms.size(); ++i) {
    CHECK(loaded[i].room_id == rooms[i].room_id);
    CHECK(loaded[i].objects[0].location.x() == doctest::Approx(double(i)));
  }
  CHECK_THROWS_AS(load_corpus_split(dir / "missing"), Error);
  fs::remove_all(dir);
}

TEST_CASE("stats sidecar round trip") {
  const auto dir = temp_dir("stats");
  NormalizationStats s;
  s.size_min = Eigen::Vector3d(0.1, 0.2, 0.3);
  s.size_max = Eigen::Vector3d(1.1, 1.2, 1.3);
  s.loc_min = Eigen::Vector3d(-3, -2, 0);
  s.loc_max = Eigen::Vector3d(3, 2, 2.5);
  save_stats(s, dir / "stats.json");
  const auto back = load_stats(dir / "stats.json");
  CHECK((back.size_min - s.size_min).norm() == 0.0);
  CHECK((back.size_max - s.size_max).norm() == 0.0);
  CHECK((back.loc_min - s.loc_min).norm() == 0.0);
  CHECK((back.loc_max - s.loc_max).norm() == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("malformed scene JSON is rejected") {
  CHECK_THROWS_AS(room_from_json(nlohmann::json{{"room_id", "x"}}), nlohmann::json::exception);
  nlohmann::json bad = room_to_json(sample_room());
  bad["objects"][0]["size"] = {1.0, 2.0};  // wrong arity
  CHECK_THROWS_AS(room_from_json(bad), Error);
}

}  // TEST_SUITE
