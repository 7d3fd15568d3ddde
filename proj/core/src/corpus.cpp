#include "scenediff/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "scenediff/common.hpp"
#include "scenediff/geometry.hpp"
#include "scenediff/mesh.hpp"

namespace scenediff {
namespace corpus {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSeatEps = 1e-6;
constexpr int kPlaceAttempts = 64;
constexpr int kRoomAttempts = 50;

double footprint_iou(const ObjectInstance& a, const ObjectInstance& b) {
  const auto fa = RotatedBox3D::of(a).footprint();
  const auto fb = RotatedBox3D::of(b).footprint();
  const std::vector<Eigen::Vector2d> pa(fa.begin(), fa.end());
  const std::vector<Eigen::Vector2d> pb(fb.begin(), fb.end());
  const double inter = convex_polygon_area(convex_clip(pa, pb));
  const double area_a = 4.0 * a.half_size.x() * a.half_size.y();
  const double area_b = 4.0 * b.half_size.x() * b.half_size.y();
  const double uni = area_a + area_b - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

// Count model: count_min plus a floored exponential whose mean is tuned so
// the floor comes out at count_mean - count_min, clamped to count_max.
int draw_count(const RoomTypeSpec& type, Rng& rng) {
  const double extra_mean = type.count_mean - type.count_min;
  int extra = 0;
  if (extra_mean > 0.0) {
    const double m = 1.0 / std::log1p(1.0 / extra_mean);
    extra = static_cast<int>(std::floor(-m * std::log1p(-rng.uniform())));
  }
  return std::min(type.count_min + extra, type.count_max);
}

bool is_floor_role(Role role) { return role != Role::kDecor; }

// Footprint half extents of a box whose yaw differs from the frame by k
// right angles: odd k swaps the axes.
Eigen::Vector2d quarter_turn_halves(const Eigen::Vector3d& half, int k) {
  return (k % 2 == 0) ? Eigen::Vector2d(half.x(), half.y())
                      : Eigen::Vector2d(half.y(), half.x());
}

struct Placement {
  ObjectInstance object;
  int support = -1;  // index into the room under construction
};

}  // namespace

Role role_from_string(const std::string& s) {
  if (s == "large-furniture") return Role::kLargeFurniture;
  if (s == "surface-furniture") return Role::kSurfaceFurniture;
  if (s == "decor") return Role::kDecor;
  throw Error("unknown category role: " + s);
}

std::string role_to_string(Role role) {
  switch (role) {
    case Role::kLargeFurniture: return "large-furniture";
    case Role::kSurfaceFurniture: return "surface-furniture";
    case Role::kDecor: return "decor";
  }
  throw Error("bad role value");
}

const CategorySpec& category_spec(const CorpusConfig& config, const std::string& name) {
  for (const CategorySpec& c : config.categories)
    if (c.name == name) return c;
  throw Error("unknown category: " + name);
}

void validate_config(const CorpusConfig& config) {
  check(!config.categories.empty(), "config: no categories");
  check(!config.room_types.empty(), "config: no room types");
  std::set<std::string> names;
  for (const CategorySpec& c : config.categories) {
    check(names.insert(c.name).second, "config: duplicate category " + c.name);
    check((c.half_min.array() > 0.0).all() && (c.half_min.array() < c.half_max.array()).all(),
          "config: bad size range for " + c.name);
    if (c.role == Role::kDecor) {
      check(!c.on_surface_of.empty(), "config: decor " + c.name + " lists no surfaces");
      for (const std::string& s : c.on_surface_of)
        check(category_spec(config, s).role == Role::kSurfaceFurniture,
              "config: decor " + c.name + " references non-surface " + s);
    } else {
      check(c.on_surface_of.empty(), "config: " + c.name + " is not decor");
    }
  }
  for (const RoomTypeSpec& t : config.room_types) {
    check(!t.categories.empty(), "config: empty menu for " + t.name);
    check(t.count_min >= 1 && t.count_min <= t.count_mean && t.count_mean <= t.count_max,
          "config: bad count distribution for " + t.name);
    check(t.floor_fraction > 0.0 && t.floor_fraction <= 1.0,
          "config: bad floor fraction for " + t.name);
    check((t.room_half.array() > 0.0).all(), "config: bad room bounds for " + t.name);
    bool any_floor = false;
    for (const std::string& name : t.categories) {
      const CategorySpec& c = category_spec(config, name);
      any_floor = any_floor || is_floor_role(c.role);
      if (c.role == Role::kDecor) {
        const bool reachable = std::any_of(
            c.on_surface_of.begin(), c.on_surface_of.end(), [&](const std::string& s) {
              return std::find(t.categories.begin(), t.categories.end(), s) !=
                     t.categories.end();
            });
        check(reachable, "config: menu " + t.name + " has no surface for " + name);
      }
    }
    check(any_floor, "config: menu " + t.name + " has no floor furniture");
  }
  check(config.room_count > 0, "config: room count must be positive");
  check(config.expansion_factor >= 1, "config: expansion factor must be >= 1");
  check(config.entries_per_category >= 1, "config: need at least one entry per category");
}

namespace {

CategorySpec cat(std::string name, Role role, bool deletable, bool replaceable,
                 Eigen::Vector3d lo, Eigen::Vector3d hi,
                 std::vector<std::string> surfaces = {}) {
  CategorySpec c;
  c.name = std::move(name);
  c.role = role;
  c.deletable = deletable;
  c.replaceable = replaceable;
  c.half_min = lo;
  c.half_max = hi;
  c.on_surface_of = std::move(surfaces);
  return c;
}

CorpusConfig paper_config() {
  CorpusConfig config;
  const Role L = Role::kLargeFurniture;
  const Role S = Role::kSurfaceFurniture;
  const Role D = Role::kDecor;
  config.categories = {
      cat("bed", L, false, true, {0.70, 0.45, 0.20}, {1.00, 0.70, 0.30}),
      cat("wardrobe", L, false, true, {0.40, 0.25, 0.90}, {0.65, 0.40, 1.10}),
      cat("sofa", L, false, true, {0.80, 0.40, 0.35}, {1.20, 0.55, 0.50}),
      cat("bookcase", L, true, true, {0.35, 0.15, 0.80}, {0.60, 0.25, 1.10}),
      cat("chair", L, true, true, {0.22, 0.22, 0.40}, {0.30, 0.30, 0.55}),
      cat("armchair", L, true, true, {0.35, 0.35, 0.35}, {0.50, 0.50, 0.50}),
      cat("desk", S, false, true, {0.55, 0.30, 0.36}, {0.80, 0.45, 0.40}),
      cat("table", S, false, true, {0.40, 0.40, 0.35}, {0.75, 0.60, 0.40}),
      cat("nightstand", S, true, true, {0.20, 0.18, 0.25}, {0.30, 0.28, 0.32}),
      cat("shelf", S, true, true, {0.40, 0.15, 0.30}, {0.60, 0.25, 0.45}),
      cat("lamp", D, true, true, {0.06, 0.06, 0.15}, {0.12, 0.12, 0.30},
          {"desk", "table", "nightstand", "shelf"}),
      cat("plant", D, true, true, {0.06, 0.06, 0.10}, {0.14, 0.14, 0.25},
          {"table", "shelf", "desk"}),
      cat("vase", D, true, true, {0.04, 0.04, 0.08}, {0.08, 0.08, 0.18},
          {"table", "shelf", "nightstand"}),
      cat("monitor", D, false, true, {0.25, 0.03, 0.15}, {0.32, 0.06, 0.22}, {"desk"}),
      cat("keyboard", D, true, true, {0.18, 0.06, 0.010}, {0.25, 0.09, 0.020}, {"desk"}),
      cat("book", D, true, true, {0.08, 0.06, 0.010}, {0.12, 0.09, 0.030},
          {"desk", "table", "shelf", "nightstand"}),
      cat("clock", D, true, true, {0.05, 0.02, 0.05}, {0.09, 0.04, 0.09},
          {"shelf", "nightstand", "desk", "table"}),
      cat("bowl", D, true, true, {0.06, 0.06, 0.030}, {0.10, 0.10, 0.050},
          {"table", "shelf"}),
      cat("frame", D, true, true, {0.06, 0.010, 0.08}, {0.10, 0.020, 0.12},
          {"shelf", "desk", "nightstand", "table"}),
      cat("mug", D, true, true, {0.03, 0.03, 0.040}, {0.05, 0.05, 0.060},
          {"desk", "table"}),
  };
  RoomTypeSpec bedroom;
  bedroom.name = "bedroom";
  bedroom.categories = {"bed", "wardrobe", "nightstand", "chair", "desk",
                        "lamp", "vase", "book", "clock", "frame"};
  bedroom.count_min = 4;
  bedroom.count_mean = 9.0;
  bedroom.count_max = 24;
  bedroom.room_half = {2.6, 2.6};
  RoomTypeSpec office;
  office.name = "office";
  office.categories = {"desk", "chair", "bookcase", "shelf", "table", "monitor",
                       "keyboard", "lamp", "book", "plant", "mug", "clock"};
  office.count_min = 4;
  office.count_mean = 10.0;
  office.count_max = 28;
  office.room_half = {2.8, 2.8};
  RoomTypeSpec living;
  living.name = "living-room";
  living.categories = {"sofa", "armchair", "table", "bookcase", "shelf",
                       "vase", "plant", "lamp", "book", "bowl", "clock", "frame"};
  living.count_min = 5;
  living.count_mean = 12.0;
  living.count_max = 32;
  living.room_half = {3.2, 3.2};
  config.room_types = {bedroom, office, living};
  config.room_count = 300;
  config.expansion_factor = 100;
  config.entries_per_category = 4;
  return config;
}

// Small single-type configuration sized for quick end-to-end runs. Its
// count distribution stays below the rich-details regime on purpose.
CorpusConfig desk_config() {
  CorpusConfig config;
  const Role L = Role::kLargeFurniture;
  const Role S = Role::kSurfaceFurniture;
  const Role D = Role::kDecor;
  config.categories = {
      cat("desk", S, false, true, {0.55, 0.30, 0.36}, {0.80, 0.45, 0.40}),
      cat("chair", L, true, true, {0.22, 0.22, 0.40}, {0.30, 0.30, 0.55}),
      cat("bookcase", L, true, true, {0.35, 0.15, 0.80}, {0.60, 0.25, 1.10}),
      cat("lamp", D, true, true, {0.06, 0.06, 0.15}, {0.12, 0.12, 0.30}, {"desk"}),
      cat("monitor", D, false, true, {0.25, 0.03, 0.15}, {0.32, 0.06, 0.22}, {"desk"}),
      cat("book", D, true, true, {0.08, 0.06, 0.010}, {0.12, 0.09, 0.030}, {"desk"}),
  };
  RoomTypeSpec office;
  office.name = "office";
  office.categories = {"desk", "chair", "bookcase", "lamp", "monitor", "book"};
  office.count_min = 3;
  office.count_mean = 6.0;
  office.count_max = 12;
  office.floor_fraction = 0.5;
  office.room_half = {2.2, 2.2};
  config.room_types = {office};
  config.room_count = 120;
  config.expansion_factor = 4;
  config.entries_per_category = 3;
  return config;
}

}  // namespace

CorpusConfig preset_config(const std::string& name) {
  if (name == "paper") return paper_config();
  if (name == "desk") return desk_config();
  throw Error("unknown corpus preset: " + name);
}

frs::FurnitureDatabase build_database(const CorpusConfig& config, std::uint64_t seed) {
  validate_config(config);
  Rng rng(Rng::mix(seed, 0x66646221u));
  std::vector<frs::FurnitureEntry> entries;
  std::vector<MeshProxy> meshes;
  std::map<std::string, frs::CategoryFlags> flags;
  int next_id = 1;
  for (const CategorySpec& c : config.categories) {
    flags[c.name] = {c.deletable, c.replaceable};
    for (int i = 0; i < config.entries_per_category; ++i) {
      frs::FurnitureEntry entry;
      entry.id = next_id++;
      entry.category = c.name;
      for (int axis = 0; axis < 3; ++axis)
        entry.size[axis] = rng.uniform(c.half_min[axis], c.half_max[axis]);
      entry.mesh = static_cast<int>(meshes.size());
      meshes.push_back(c.role == Role::kSurfaceFurniture ? table_mesh(entry.size, c.name)
                                                         : box_mesh(entry.size, c.name));
      entries.push_back(entry);
    }
  }
  return frs::build_index(entries, meshes, flags);
}

namespace {

const frs::FurnitureEntry& draw_entry(const frs::FurnitureDatabase& db,
                                      const std::string& category, Rng& rng) {
  const std::vector<int>& bucket = db.bucket(category);
  return db.entries[bucket[rng.uniform_int(0, static_cast<std::int64_t>(bucket.size()) - 1)]];
}

// One construction attempt; returns false when rejection sampling runs out
// of placement attempts.
bool try_build_room(const CorpusConfig& config, const frs::FurnitureDatabase& db,
                    const RoomTypeSpec& type, Rng& rng, std::vector<Placement>& out) {
  std::vector<std::string> floor_menu, decor_menu;
  for (const std::string& name : type.categories) {
    (is_floor_role(category_spec(config, name).role) ? floor_menu : decor_menu).push_back(name);
  }
  std::vector<std::string> surface_menu;
  for (const std::string& name : floor_menu)
    if (category_spec(config, name).role == Role::kSurfaceFurniture)
      surface_menu.push_back(name);

  const int n = draw_count(type, rng);
  int floor_n = decor_menu.empty()
                    ? n
                    : std::clamp(static_cast<int>(std::lround(n * type.floor_fraction)), 1, n);
  const int decor_n = n - floor_n;

  out.clear();
  // floor furniture first; lead with a surface so decor has somewhere to go
  for (int i = 0; i < floor_n; ++i) {
    std::string name;
    if (i == 0 && decor_n > 0) {
      name = surface_menu[rng.uniform_int(0, static_cast<std::int64_t>(surface_menu.size()) - 1)];
    } else {
      name = floor_menu[rng.uniform_int(0, static_cast<std::int64_t>(floor_menu.size()) - 1)];
    }
    const frs::FurnitureEntry& entry = draw_entry(db, name, rng);
    bool placed = false;
    for (int attempt = 0; attempt < kPlaceAttempts && !placed; ++attempt) {
      ObjectInstance obj;
      obj.category = name;
      obj.half_size = entry.size;
      obj.yaw = rng.uniform(-kPi, kPi);
      const double reach = std::hypot(entry.size.x(), entry.size.y());
      const double mx = type.room_half.x() - reach;
      const double my = type.room_half.y() - reach;
      if (mx <= 0.0 || my <= 0.0) break;  // cannot fit this entry at all
      obj.location = {rng.uniform(-mx, mx), rng.uniform(-my, my), entry.size.z()};
      placed = std::all_of(out.begin(), out.end(), [&](const Placement& p) {
        return footprint_iou(obj, p.object) <= 0.05;
      });
      if (placed) out.push_back({obj, -1});
    }
    if (!placed) return false;
  }

  // decor with a long-tail category preference
  std::vector<double> decor_weight(decor_menu.size());
  for (size_t i = 0; i < decor_menu.size(); ++i) decor_weight[i] = 1.0 / (1.0 + i);
  const double weight_sum = std::accumulate(decor_weight.begin(), decor_weight.end(), 0.0);

  for (int d = 0; d < decor_n; ++d) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlaceAttempts && !placed; ++attempt) {
      double pick = rng.uniform(0.0, weight_sum);
      size_t ci = 0;
      while (ci + 1 < decor_menu.size() && pick >= decor_weight[ci]) pick -= decor_weight[ci++];
      const CategorySpec& spec = category_spec(config, decor_menu[ci]);
      const frs::FurnitureEntry& entry = draw_entry(db, spec.name, rng);

      std::vector<std::pair<int, int>> spots;  // (support index, quarter turns)
      for (size_t s = 0; s < out.size(); ++s) {
        const ObjectInstance& sup = out[s].object;
        if (std::find(spec.on_surface_of.begin(), spec.on_surface_of.end(), sup.category) ==
            spec.on_surface_of.end())
          continue;
        for (int k = 0; k < 4; ++k) {
          const Eigen::Vector2d fp = quarter_turn_halves(entry.size, k);
          if (fp.x() < sup.half_size.x() && fp.y() < sup.half_size.y())
            spots.emplace_back(static_cast<int>(s), k);
        }
      }
      if (spots.empty()) continue;
      const auto [si, k] = spots[rng.uniform_int(0, static_cast<std::int64_t>(spots.size()) - 1)];
      const ObjectInstance& sup = out[si].object;
      const Eigen::Vector2d fp = quarter_turn_halves(entry.size, k);
      const double u = rng.uniform(-(sup.half_size.x() - fp.x()), sup.half_size.x() - fp.x());
      const double v = rng.uniform(-(sup.half_size.y() - fp.y()), sup.half_size.y() - fp.y());
      const double c = std::cos(sup.yaw), s = std::sin(sup.yaw);

      ObjectInstance obj;
      obj.category = spec.name;
      obj.half_size = entry.size;
      obj.yaw = std::remainder(sup.yaw + k * (kPi / 2.0), 2.0 * kPi);
      obj.location = {sup.location.x() + c * u - s * v, sup.location.y() + s * u + c * v,
                      sup.location.z() + sup.half_size.z() + entry.size.z()};

      // prefer spots clear of other decor on the same support, but do not
      // fail the room over a crowded tabletop
      const bool clear = std::none_of(out.begin(), out.end(), [&](const Placement& p) {
        return p.support == si && footprint_iou(obj, p.object) > 0.05;
      });
      if (clear || attempt + 1 == kPlaceAttempts) {
        out.push_back({obj, si});
        placed = true;
      }
    }
    if (!placed) return false;
  }
  return true;
}

}  // namespace

Room generate_room(const CorpusConfig& config, const frs::FurnitureDatabase& db,
                   const std::string& room_type, std::uint64_t seed) {
  validate_config(config);
  const auto it = std::find_if(config.room_types.begin(), config.room_types.end(),
                               [&](const RoomTypeSpec& t) { return t.name == room_type; });
  check(it != config.room_types.end(), "generate_room: unknown room type " + room_type);

  std::vector<Placement> placements;
  for (int attempt = 0; attempt < kRoomAttempts; ++attempt) {
    Rng rng(Rng::mix(seed, 0x726f6f6du + attempt));
    if (try_build_room(config, db, *it, rng, placements)) {
      Room room;
      room.room_id = room_type + "-" + std::to_string(seed);
      room.room_type = room_type;
      for (const Placement& p : placements) room.objects.push_back(p.object);
      return room;
    }
  }
  throw Error("generate_room: no valid placement for " + room_type +
              ", config looks unsatisfiable");
}

std::vector<Room> generate_corpus(const CorpusConfig& config, const frs::FurnitureDatabase& db) {
  validate_config(config);
  std::vector<Room> rooms;
  rooms.reserve(config.room_count);
  for (int i = 0; i < config.room_count; ++i) {
    const RoomTypeSpec& type = config.room_types[i % config.room_types.size()];
    rooms.push_back(generate_room(config, db, type.name, Rng::mix(config.seed, i)));
  }
  return rooms;
}

Room augment_rotate(const Room& room, int angle_deg) {
  check(angle_deg == 90 || angle_deg == 180 || angle_deg == 270,
        "augment_rotate: angle must be 90, 180, or 270");
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const ObjectInstance& o : room.objects) centroid += o.location.head<2>();
  if (!room.objects.empty()) centroid /= static_cast<double>(room.objects.size());

  const int quarters = angle_deg / 90;
  Room rotated = room;
  for (ObjectInstance& o : rotated.objects) {
    Eigen::Vector2d p = o.location.head<2>() - centroid;
    for (int q = 0; q < quarters; ++q) p = Eigen::Vector2d(-p.y(), p.x());
    o.location.head<2>() = centroid + p;
    o.yaw = std::remainder(o.yaw + quarters * (kPi / 2.0), 2.0 * kPi);
  }
  return rotated;
}

namespace {

bool center_on_top(const ObjectInstance& below, const ObjectInstance& above) {
  if (std::abs((above.location.z() - above.half_size.z()) -
               (below.location.z() + below.half_size.z())) > kSeatEps)
    return false;
  const double c = std::cos(below.yaw), s = std::sin(below.yaw);
  const Eigen::Vector2d d = above.location.head<2>() - below.location.head<2>();
  const double u = c * d.x() + s * d.y();
  const double v = -s * d.x() + c * d.y();
  return std::abs(u) <= below.half_size.x() && std::abs(v) <= below.half_size.y();
}

}  // namespace

Room augment_delete_replace(const Room& room, const frs::FurnitureDatabase& db,
                            double p_delete, std::uint64_t seed,
                            std::vector<std::string>* warnings) {
  check(p_delete >= 0.0 && p_delete <= 1.0, "augment_delete_replace: p_delete out of range");
  const size_t n = room.objects.size();

  // support edges inferred from seated geometry
  std::vector<int> support(n, -1);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (i != j && center_on_top(room.objects[j], room.objects[i])) {
        support[i] = static_cast<int>(j);
        break;
      }

  // one pass of decisions so the draw stream is independent of cascades
  Rng rng(Rng::mix(seed, 0x61756764u));
  enum class Fate { kKeep, kDelete, kReplace };
  std::vector<Fate> fate(n, Fate::kKeep);
  std::vector<int> replacement(n, -1);
  for (size_t i = 0; i < n; ++i) {
    const ObjectInstance& obj = room.objects[i];
    const auto flag_it = db.category_flags.find(obj.category);
    const frs::CategoryFlags flags =
        flag_it == db.category_flags.end() ? frs::CategoryFlags{} : flag_it->second;
    if (flags.deletable && rng.uniform() < p_delete) {
      fate[i] = Fate::kDelete;
      continue;
    }
    if (flags.deletable || flags.replaceable) {
      const auto bucket_it = db.by_category.find(obj.category);
      if (bucket_it == db.by_category.end() || bucket_it->second.empty()) {
        if (warnings)
          warnings->push_back("no replacement pool for " + obj.category + ", left unchanged");
        continue;
      }
      fate[i] = Fate::kReplace;
      replacement[i] = static_cast<int>(draw_entry(db, obj.category, rng).id);
    }
  }

  // deletion cascades down support chains
  std::vector<char> gone(n, 0);
  for (size_t i = 0; i < n; ++i) gone[i] = fate[i] == Fate::kDelete;
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t i = 0; i < n; ++i)
      if (!gone[i] && support[i] >= 0 && gone[support[i]]) {
        gone[i] = 1;
        changed = true;
      }
  }

  // replaced supports move their riders, so walk the stacks bottom up
  std::vector<int> depth(n, 0);
  for (size_t i = 0; i < n; ++i)
    for (int j = support[i]; j >= 0 && depth[i] < static_cast<int>(n); j = support[j]) ++depth[i];
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return depth[a] < depth[b]; });

  Room result = room;
  std::vector<double> top_shift(n, 0.0);
  for (size_t i : order) {
    if (gone[i]) continue;
    ObjectInstance& obj = result.objects[i];
    if (support[i] >= 0) obj.location.z() += top_shift[support[i]];
    if (fate[i] == Fate::kReplace) {
      const frs::FurnitureEntry& entry = db.entry_by_id(replacement[i]);
      const double base = obj.location.z() - obj.half_size.z();
      const double old_top = obj.location.z() + obj.half_size.z();
      obj.half_size = entry.size;
      obj.location.z() = base + entry.size.z();
      top_shift[i] = (obj.location.z() + entry.size.z()) - old_top;
    }
  }

  Room pruned;
  pruned.room_id = result.room_id;
  pruned.room_type = result.room_type;
  for (size_t i = 0; i < n; ++i)
    if (!gone[i]) pruned.objects.push_back(result.objects[i]);
  return pruned;
}

std::vector<Room> expand_corpus(const std::vector<Room>& rooms, const frs::FurnitureDatabase& db,
                                int factor, std::uint64_t seed, const AugmentOptions& options,
                                std::vector<std::string>* warnings) {
  check(factor >= 1, "expand_corpus: factor must be >= 1");
  std::vector<Room> out;
  out.reserve(rooms.size() * static_cast<size_t>(factor));
  for (size_t i = 0; i < rooms.size(); ++i) {
    out.push_back(rooms[i]);
    for (int v = 1; v < factor; ++v) {
      const std::uint64_t variant_seed = Rng::mix(Rng::mix(seed, i), v);
      Room variant;
      // a delete cascade can empty a small room; retry, then settle for
      // rotation only
      for (int attempt = 0; attempt < 8; ++attempt) {
        Rng rng(Rng::mix(variant_seed, attempt));
        variant = rooms[i];
        if (options.rotate)
          variant = augment_rotate(variant, 90 * static_cast<int>(rng.uniform_int(1, 3)));
        if (options.delete_replace)
          variant = augment_delete_replace(variant, db, options.p_delete, rng.next_u64(),
                                           warnings);
        if (!variant.objects.empty() || rooms[i].objects.empty()) break;
        if (attempt == 7) {
          variant = options.rotate ? augment_rotate(rooms[i], 90) : rooms[i];
          if (warnings)
            warnings->push_back("variant of " + rooms[i].room_id +
                                " kept rotation only to stay nonempty");
        }
      }
      variant.room_id = rooms[i].room_id + "-v" + std::to_string(v);
      out.push_back(std::move(variant));
    }
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<Room>& rooms) {
  check(!rooms.empty(), "corpus_stats: empty corpus");
  CorpusStats stats;
  std::map<std::string, std::pair<long, long>> per_type;  // rooms, objects
  std::map<std::string, long> per_type_max;
  for (const Room& room : rooms) {
    auto& [count, objects] = per_type[room.room_type];
    ++count;
    objects += static_cast<long>(room.size());
    long& mx = per_type_max[room.room_type];
    mx = std::max(mx, static_cast<long>(room.size()));
    for (const ObjectInstance& o : room.objects) ++stats.category_counts[o.category];
    stats.total_objects += static_cast<long>(room.size());
  }
  stats.total_rooms = static_cast<long>(rooms.size());
  for (const auto& [name, pair] : per_type) {
    CorpusStats::TypeRow row;
    row.room_type = name;
    row.rooms = pair.first;
    row.mean_objects = static_cast<double>(pair.second) / static_cast<double>(pair.first);
    row.max_objects = per_type_max[name];
    stats.per_type.push_back(row);
  }
  return stats;
}

std::string stats_table(const CorpusStats& stats) {
  std::ostringstream os;
  os << "room type            rooms   mean objects   max\n";
  for (const auto& row : stats.per_type) {
    os << row.room_type;
    for (size_t i = row.room_type.size(); i < 21; ++i) os << ' ';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%5ld   %12.2f   %3ld\n", row.rooms, row.mean_objects,
                  row.max_objects);
    os << buf;
  }
  os << "total rooms " << stats.total_rooms << ", total objects " << stats.total_objects
     << "\n\ncategory counts\n";
  for (const auto& [name, count] : stats.category_counts) {
    os << name;
    for (size_t i = name.size(); i < 21; ++i) os << ' ';
    os << count << "\n";
  }
  return os.str();
}

}  // namespace corpus
}  // namespace scenediff
