#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scenediff/mesh.hpp"

namespace scenediff {
namespace frs {

// One concrete furniture asset. Size is canonical half-extents in meters;
// mesh indexes the database's proxy list (-1 when no proxy is attached).
struct FurnitureEntry {
  int id = 0;
  std::string category;
  Eigen::Vector3d size = Eigen::Vector3d::Zero();
  int mesh = -1;
};

// Behavior flags used by the corpus augmentation pipeline, keyed by category.
struct CategoryFlags {
  bool deletable = false;
  bool replaceable = false;
};

struct FurnitureDatabase {
  std::vector<FurnitureEntry> entries;
  std::vector<MeshProxy> meshes;
  // entry indices per category, ordered by ascending id
  std::map<std::string, std::vector<int>> by_category;
  std::map<std::string, CategoryFlags> category_flags;

  const FurnitureEntry& entry_by_id(int id) const;
  const std::vector<int>& bucket(const std::string& category) const;
};

// Builds the per-category index. Entry order is irrelevant; buckets are
// sorted by id so ties resolve deterministically.
FurnitureDatabase build_index(std::vector<FurnitureEntry> entries,
                              std::vector<MeshProxy> meshes = {},
                              std::map<std::string, CategoryFlags> flags = {});

struct RetrievalResult {
  int id = 0;
  Eigen::Vector3d size = Eigen::Vector3d::Zero();  // canonical, not the query
  std::string category;
};

// Nearest same-category entry by Euclidean distance on raw sizes; ties go to
// the smallest id. The returned size and category are the entry's canonical
// values.
RetrievalResult retrieve(const Eigen::Vector3d& size_query, const std::string& category,
                         const FurnitureDatabase& db);

// Manifest JSON plus one mesh proxy file per entry under dir/meshes/.
void save_database(const FurnitureDatabase& db, const std::filesystem::path& dir);
FurnitureDatabase load_database(const std::filesystem::path& dir);

}  // namespace frs
}  // namespace scenediff
