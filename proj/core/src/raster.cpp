#include "scenediff/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scenediff/common.hpp"
#include "scenediff/geometry.hpp"
#include "scenediff/png_io.hpp"
#include "scenediff/pointcloud.hpp"

namespace scenediff {

TopDownMap rasterize_topdown(const Room& room, int resolution, double extent,
                             std::vector<std::string>* warnings) {
  check(resolution > 0, "rasterize_topdown: bad resolution");
  check(extent > 0.0, "rasterize_topdown: bad extent");
  TopDownMap map;
  map.resolution = resolution;
  map.extent = extent;
  map.pixels.assign(static_cast<size_t>(resolution) * resolution * 3, 0);  // reserved black

  // painter's order: lower bases first so what sits on top wins
  std::vector<size_t> order(room.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return room.objects[a].base_z() < room.objects[b].base_z();
  });

  const double scale = static_cast<double>(resolution) / (2.0 * extent);
  for (const size_t idx : order) {
    const ObjectInstance& obj = room.objects[idx];
    const auto rgb = category_color(obj.category);
    const auto corners = RotatedBox3D::of(obj).footprint();

    double lo_x = corners[0].x(), hi_x = corners[0].x();
    double lo_y = corners[0].y(), hi_y = corners[0].y();
    for (const auto& c : corners) {
      lo_x = std::min(lo_x, c.x());
      hi_x = std::max(hi_x, c.x());
      lo_y = std::min(lo_y, c.y());
      hi_y = std::max(hi_y, c.y());
    }
    if (warnings && (lo_x < -extent || hi_x > extent || lo_y < -extent || hi_y > extent))
      warnings->push_back("object " + std::to_string(idx) + " (" + obj.category +
                          ") clipped at the map edge");

    const int px_lo = std::max(0, static_cast<int>(std::floor((lo_x + extent) * scale)));
    const int px_hi =
        std::min(resolution - 1, static_cast<int>(std::ceil((hi_x + extent) * scale)));
    const int py_lo = std::max(0, static_cast<int>(std::floor((extent - hi_y) * scale)));
    const int py_hi =
        std::min(resolution - 1, static_cast<int>(std::ceil((extent - lo_y) * scale)));

    const double c = std::cos(obj.yaw), s = std::sin(obj.yaw);
    for (int py = py_lo; py <= py_hi; ++py) {
      const double wy = extent - (py + 0.5) / scale;
      for (int px = px_lo; px <= px_hi; ++px) {
        const double wx = (px + 0.5) / scale - extent;
        const double dx = wx - obj.location.x();
        const double dy = wy - obj.location.y();
        const double u = c * dx + s * dy;
        const double v = -s * dx + c * dy;
        if (std::abs(u) <= obj.half_size.x() && std::abs(v) <= obj.half_size.y()) {
          std::uint8_t* p = map.pixels.data() + 3 * (static_cast<size_t>(py) * resolution + px);
          p[0] = rgb[0];
          p[1] = rgb[1];
          p[2] = rgb[2];
        }
      }
    }
  }
  return map;
}

void save_png(const TopDownMap& map, const std::filesystem::path& path) {
  write_png(path, map.resolution, map.resolution, map.pixels.data());
}

}  // namespace scenediff
