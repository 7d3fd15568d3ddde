#include "scenediff/frs.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "scenediff/common.hpp"
#include "scenediff/scene_io.hpp"

namespace scenediff {
namespace frs {

namespace {

using nlohmann::json;

json mesh_to_json(const MeshProxy& mesh) {
  json verts = json::array();
  for (const auto& v : mesh.vertices) verts.push_back({v.x(), v.y(), v.z()});
  json tris = json::array();
  for (const auto& t : mesh.triangles) tris.push_back({t[0], t[1], t[2]});
  return {{"category", mesh.category}, {"vertices", verts}, {"triangles", tris}};
}

MeshProxy mesh_from_json(const json& j) {
  MeshProxy mesh;
  mesh.category = j.at("category").get<std::string>();
  for (const json& v : j.at("vertices")) {
    check(v.is_array() && v.size() == 3, "mesh proxy: vertex arity");
    mesh.vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  for (const json& t : j.at("triangles")) {
    check(t.is_array() && t.size() == 3, "mesh proxy: triangle arity");
    mesh.triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
  }
  mesh.validate();
  return mesh;
}

}  // namespace

const FurnitureEntry& FurnitureDatabase::entry_by_id(int id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  fail("FurnitureDatabase: no entry with id " + std::to_string(id));
}

const std::vector<int>& FurnitureDatabase::bucket(const std::string& category) const {
  const auto it = by_category.find(category);
  check(it != by_category.end() && !it->second.empty(),
        "FurnitureDatabase: empty or unknown category " + category);
  return it->second;
}

FurnitureDatabase build_index(std::vector<FurnitureEntry> entries,
                              std::vector<MeshProxy> meshes,
                              std::map<std::string, CategoryFlags> flags) {
  check(!entries.empty(), "build_index: empty entry list");
  FurnitureDatabase db;
  db.entries = std::move(entries);
  db.meshes = std::move(meshes);
  db.category_flags = std::move(flags);

  std::set<int> seen;
  for (int i = 0; i < static_cast<int>(db.entries.size()); ++i) {
    const auto& e = db.entries[i];
    check(seen.insert(e.id).second, "build_index: duplicate id " + std::to_string(e.id));
    check((e.size.array() > 0.0).all(),
          "build_index: non-positive size on id " + std::to_string(e.id));
    check(e.mesh < static_cast<int>(db.meshes.size()),
          "build_index: mesh index out of range on id " + std::to_string(e.id));
    db.by_category[e.category].push_back(i);
  }
  for (auto& [category, bucket] : db.by_category)
    std::sort(bucket.begin(), bucket.end(),
              [&](int a, int b) { return db.entries[a].id < db.entries[b].id; });
  return db;
}

RetrievalResult retrieve(const Eigen::Vector3d& size_query, const std::string& category,
                         const FurnitureDatabase& db) {
  const auto it = db.by_category.find(category);
  check(it != db.by_category.end() && !it->second.empty(),
        "retrieve: unknown or empty category " + category);
  const FurnitureEntry* best = nullptr;
  double best_d2 = 0.0;
  for (int idx : it->second) {
    const auto& e = db.entries[idx];
    const double d2 = (e.size - size_query).squaredNorm();
    // Strict comparison keeps the smallest id on ties because buckets are
    // id-sorted.
    if (best == nullptr || d2 < best_d2) {
      best = &e;
      best_d2 = d2;
    }
  }
  return {best->id, best->size, best->category};
}

void save_database(const FurnitureDatabase& db, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "meshes");
  json manifest;
  manifest["entries"] = json::array();
  for (const auto& e : db.entries) {
    json je = {{"id", e.id},
               {"category", e.category},
               {"size", {e.size.x(), e.size.y(), e.size.z()}}};
    if (e.mesh >= 0) {
      const std::string name = "meshes/" + std::to_string(e.id) + ".json";
      write_json_file(mesh_to_json(db.meshes[e.mesh]), dir / name);
      je["mesh"] = name;
    }
    manifest["entries"].push_back(je);
  }
  json flags = json::object();
  for (const auto& [category, f] : db.category_flags)
    flags[category] = {{"deletable", f.deletable}, {"replaceable", f.replaceable}};
  manifest["category_flags"] = flags;
  write_json_file(manifest, dir / "database.json");
}

FurnitureDatabase load_database(const std::filesystem::path& dir) {
  const json manifest = read_json_file(dir / "database.json");
  std::vector<FurnitureEntry> entries;
  std::vector<MeshProxy> meshes;
  for (const json& je : manifest.at("entries")) {
    FurnitureEntry e;
    e.id = je.at("id").get<int>();
    e.category = je.at("category").get<std::string>();
    const json& s = je.at("size");
    check(s.is_array() && s.size() == 3, "database: size arity");
    e.size = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
    if (je.contains("mesh")) {
      meshes.push_back(mesh_from_json(read_json_file(dir / je["mesh"].get<std::string>())));
      e.mesh = static_cast<int>(meshes.size()) - 1;
    }
    entries.push_back(std::move(e));
  }
  std::map<std::string, CategoryFlags> flags;
  if (manifest.contains("category_flags"))
    for (const auto& [category, f] : manifest["category_flags"].items())
      flags[category] = {f.at("deletable").get<bool>(), f.at("replaceable").get<bool>()};
  return build_index(std::move(entries), std::move(meshes), std::move(flags));
}

}  // namespace frs
}  // namespace scenediff
