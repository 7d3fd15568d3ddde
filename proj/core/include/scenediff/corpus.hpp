#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scenediff/frs.hpp"
#include "scenediff/rng.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {
namespace corpus {

enum class Role { kLargeFurniture, kSurfaceFurniture, kDecor };

Role role_from_string(const std::string& s);
std::string role_to_string(Role role);

struct CategorySpec {
  std::string name;
  Role role = Role::kLargeFurniture;
  bool deletable = false;
  bool replaceable = true;
  Eigen::Vector3d half_min = Eigen::Vector3d::Zero();  // per-axis half extents, meters
  Eigen::Vector3d half_max = Eigen::Vector3d::Zero();
  std::vector<std::string> on_surface_of;  // decor only: admissible supports
};

struct RoomTypeSpec {
  std::string name;
  std::vector<std::string> categories;  // menu drawn from CorpusConfig categories
  int count_min = 4;
  double count_mean = 9.0;
  int count_max = 24;
  double floor_fraction = 0.45;  // share of the count placed on the floor
  Eigen::Vector2d room_half = Eigen::Vector2d(3.0, 3.0);
};

struct CorpusConfig {
  std::vector<CategorySpec> categories;
  std::vector<RoomTypeSpec> room_types;
  std::uint64_t seed = 0;
  int room_count = 100;
  int expansion_factor = 1;
  int entries_per_category = 4;  // furniture database depth
};

// Structural checks: size ranges ordered, menus nonempty and resolvable,
// every decor category reachable through a surface in the same menu.
void validate_config(const CorpusConfig& config);

const CategorySpec& category_spec(const CorpusConfig& config, const std::string& name);

// Shipped configurations. "paper" targets the rich-details regime (count
// mean >= 8, max >= 2x mean); "desk" is a small fast variant for tests.
CorpusConfig preset_config(const std::string& name);

// Samples canonical furniture per category from the configured size ranges.
// Surface furniture gets a table proxy, everything else a box.
frs::FurnitureDatabase build_database(const CorpusConfig& config, std::uint64_t seed);

// Procedural room: floor furniture rejection-sampled to pairwise footprint
// IoU <= 0.05 inside the room bounds, decor seated on support tops with its
// footprint inside the support. Pure function of (config, db, type, seed).
Room generate_room(const CorpusConfig& config, const frs::FurnitureDatabase& db,
                   const std::string& room_type, std::uint64_t seed);

// config.room_count rooms cycling over the configured room types.
std::vector<Room> generate_corpus(const CorpusConfig& config, const frs::FurnitureDatabase& db);

// Exact right-angle rotation of all objects about the room's object-center
// centroid; yaw advances by the same angle. angle_deg in {90, 180, 270}.
Room augment_rotate(const Room& room, int angle_deg);

// Deletable objects are deleted with p_delete else replaced; replaceable
// ones are always replaced (same category, re-seated base height). Decor
// standing on a deleted surface goes with it; decor on a replaced surface
// keeps its base on the new top. Unfillable replacements are left alone
// and noted in warnings.
Room augment_delete_replace(const Room& room, const frs::FurnitureDatabase& db,
                            double p_delete, std::uint64_t seed,
                            std::vector<std::string>* warnings = nullptr);

struct AugmentOptions {
  bool rotate = true;
  bool delete_replace = true;
  double p_delete = 0.3;
};

// factor variants per template: the template itself, then factor-1
// augmented copies (rotation composed with delete/replace). Output order is
// template-major, size exactly factor * rooms.size().
std::vector<Room> expand_corpus(const std::vector<Room>& rooms, const frs::FurnitureDatabase& db,
                                int factor, std::uint64_t seed,
                                const AugmentOptions& options = {},
                                std::vector<std::string>* warnings = nullptr);

struct CorpusStats {
  struct TypeRow {
    std::string room_type;
    long rooms = 0;
    double mean_objects = 0.0;
    long max_objects = 0;
  };
  std::vector<TypeRow> per_type;  // sorted by room type
  std::map<std::string, long> category_counts;
  long total_rooms = 0;
  long total_objects = 0;
};

CorpusStats corpus_stats(const std::vector<Room>& rooms);
std::string stats_table(const CorpusStats& stats);

}  // namespace corpus
}  // namespace scenediff
