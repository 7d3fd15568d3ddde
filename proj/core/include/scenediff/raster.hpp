#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scenediff/scene.hpp"

namespace scenediff {

// Top-down semantic map: category-colored rotated footprints over a black
// background, painted lower base first so stacked objects stay visible.
struct TopDownMap {
  int resolution = 0;
  double extent = 0.0;  // world half width; pixels span [-extent, extent]
  std::vector<std::uint8_t> pixels;  // rgb, row-major, row 0 at +y

  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<size_t>(y) * resolution + x);
  }
};

TopDownMap rasterize_topdown(const Room& room, int resolution = 64, double extent = 4.0,
                             std::vector<std::string>* warnings = nullptr);

void save_png(const TopDownMap& map, const std::filesystem::path& path);

}  // namespace scenediff
