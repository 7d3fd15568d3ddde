#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "scenediff/common.hpp"
#include "scenediff/pointcloud.hpp"
#include "scenediff/raster.hpp"

using namespace scenediff;
using testutil::make_object;

namespace {

long count_color(const TopDownMap& map, const std::array<std::uint8_t, 3>& rgb) {
  long count = 0;
  for (int y = 0; y < map.resolution; ++y)
    for (int x = 0; x < map.resolution; ++x) {
      const std::uint8_t* p = map.at(x, y);
      if (p[0] == rgb[0] && p[1] == rgb[1] && p[2] == rgb[2]) ++count;
    }
  return count;
}

}  // namespace

TEST_SUITE_BEGIN("raster");

TEST_CASE("empty room is all background") {
  Room room;
  room.room_type = "office";
  const TopDownMap map = rasterize_topdown(room, 32, 2.0);
  CHECK(count_color(map, {0, 0, 0}) == 32 * 32);
}

TEST_CASE("filled pixel count matches the analytic footprint area") {
  Room room;
  room.room_type = "office";
  room.objects = {make_object("crate", {0.5, 0.5, 0.4}, {0.0, 0.0, 0.4}, 0.0)};
  const int res = 200;
  const double extent = 2.0;
  const TopDownMap map = rasterize_topdown(room, res, extent);
  const double scale = res / (2.0 * extent);
  const double expected = 1.0 * scale * scale;  // 1 m^2 footprint
  const long filled = count_color(map, category_color("crate"));
  CHECK(std::abs(filled - expected) <= 0.02 * expected);

  // a rotated copy covers the same area
  room.objects[0].yaw = 0.7;
  const long rotated = count_color(rasterize_topdown(room, res, extent),
                                   category_color("crate"));
  CHECK(std::abs(rotated - expected) <= 0.02 * expected);
}

TEST_CASE("rasterization is deterministic") {
  Room room;
  room.room_type = "office";
  room.objects = {make_object("desk", {0.7, 0.4, 0.38}, {0.4, -0.3, 0.38}, 0.5),
                  make_object("chair", {0.25, 0.25, 0.45}, {-0.8, 0.6, 0.45}, -1.2)};
  const TopDownMap a = rasterize_topdown(room, 64, 2.0);
  const TopDownMap b = rasterize_topdown(room, 64, 2.0);
  CHECK(a.pixels == b.pixels);
}

TEST_CASE("higher objects paint over their supports") {
  Room room;
  room.room_type = "office";
  room.objects = {make_object("lamp", {0.1, 0.1, 0.2}, {0.0, 0.0, 0.96}, 0.0),
                  make_object("desk", {0.7, 0.4, 0.38}, {0.0, 0.0, 0.38}, 0.0)};
  const TopDownMap map = rasterize_topdown(room, 128, 1.0);
  const auto lamp_rgb = category_color("lamp");
  const auto desk_rgb = category_color("desk");
  // center pixel belongs to the lamp even though the desk is listed later
  CHECK(std::equal(lamp_rgb.begin(), lamp_rgb.end(), map.at(64, 64)));
  CHECK(count_color(map, lamp_rgb) > 0);
  CHECK(count_color(map, desk_rgb) > 0);
}

TEST_CASE("objects beyond the extent are clipped with a warning") {
  Room room;
  room.room_type = "office";
  room.objects = {make_object("crate", {0.5, 0.5, 0.5}, {1.9, 0.0, 0.5}, 0.0)};
  std::vector<std::string> warnings;
  const TopDownMap map = rasterize_topdown(room, 64, 2.0, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("crate") != std::string::npos);
  CHECK(count_color(map, category_color("crate")) > 0);

  CHECK_THROWS_AS(rasterize_topdown(room, 0, 2.0), Error);
  CHECK_THROWS_AS(rasterize_topdown(room, 64, 0.0), Error);
}

TEST_CASE("png export writes a plausible file") {
  Room room;
  room.room_type = "office";
  room.objects = {make_object("desk", {0.7, 0.4, 0.38}, {0.0, 0.0, 0.38}, 0.3)};
  const TopDownMap map = rasterize_topdown(room, 48, 2.0);

  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "scenediff_test_map.png";
  save_png(map, path);
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  unsigned char head[24];
  is.read(reinterpret_cast<char*>(head), sizeof(head));
  REQUIRE(is.gcount() == 24);
  // signature, then IHDR width and height as big-endian 48
  CHECK(head[0] == 137);
  CHECK(head[1] == 'P');
  CHECK(head[2] == 'N');
  CHECK(head[3] == 'G');
  CHECK(std::string(reinterpret_cast<char*>(head + 12), 4) == "IHDR");
  CHECK((head[16] << 24 | head[17] << 16 | head[18] << 8 | head[19]) == 48);
  CHECK((head[20] << 24 | head[21] << 16 | head[22] << 8 | head[23]) == 48);
  is.close();
  fs::remove(path);
}

TEST_SUITE_END();
