#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scenediff/frs.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {

struct LabeledPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::array<std::uint8_t, 3> rgb = {0, 0, 0};
  int label = 0;
};

struct LabeledPointCloud {
  std::vector<LabeledPoint> points;
  std::vector<std::string> label_names;  // label ids index this list
};

// Stable category color: a hash of the name, brightened away from the
// reserved black background.
std::array<std::uint8_t, 3> category_color(const std::string& name);

// points_per_object samples per furniture piece, area-uniform over the
// object's transformed proxy surface. Each object resolves to its nearest
// database entry's mesh, scaled per axis to the instance size. Labels are
// indices into the room's sorted category set.
LabeledPointCloud sample_pointcloud(const Room& room, const frs::FurnitureDatabase& db,
                                    int points_per_object = 30000, std::uint64_t seed = 0);

// ASCII PLY with x y z, uchar rgb, int label, plus one comment line naming
// each label id.
void save_ply(const LabeledPointCloud& cloud, const std::filesystem::path& path);
LabeledPointCloud load_ply(const std::filesystem::path& path);

}  // namespace scenediff
