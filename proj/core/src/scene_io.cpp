#include "scenediff/scene_io.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scenediff/common.hpp"

namespace scenediff {

namespace {

using nlohmann::json;

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from_json(const json& j, const char* what) {
  check(j.is_array() && j.size() == 3, std::string("expected 3-vector for ") + what);
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json room_to_json(const Room& room) {
  json objects = json::array();
  for (const ObjectInstance& obj : room.objects) {
    objects.push_back({{"class", obj.category},
                       {"size", vec3_to_json(obj.half_size)},
                       {"location", vec3_to_json(obj.location)},
                       {"yaw", obj.yaw}});
  }
  return {{"room_id", room.room_id}, {"room_type", room.room_type}, {"objects", objects}};
}

Room room_from_json(const json& j) {
  Room room;
  room.room_id = j.at("room_id").get<std::string>();
  room.room_type = j.at("room_type").get<std::string>();
  for (const json& o : j.at("objects")) {
    ObjectInstance obj;
    obj.category = o.at("class").get<std::string>();
    obj.half_size = vec3_from_json(o.at("size"), "size");
    obj.location = vec3_from_json(o.at("location"), "location");
    obj.yaw = o.at("yaw").get<double>();
    room.objects.push_back(std::move(obj));
  }
  return room;
}

void save_room(const Room& room, const std::filesystem::path& path) {
  write_json_file(room_to_json(room), path);
}

Room load_room(const std::filesystem::path& path) { return room_from_json(read_json_file(path)); }

void save_corpus_split(const std::vector<Room>& rooms, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const Room& room : rooms) {
    check(!room.room_id.empty(), "save_corpus_split: room without id");
    save_room(room, dir / (room.room_id + ".json"));
  }
}

std::vector<Room> load_corpus_split(const std::filesystem::path& dir) {
  check(std::filesystem::is_directory(dir), "corpus split not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<Room> rooms;
  rooms.reserve(files.size());
  for (const auto& f : files) rooms.push_back(load_room(f));
  return rooms;
}

json stats_to_json(const NormalizationStats& stats) {
  return {{"size_min", vec3_to_json(stats.size_min)},
          {"size_max", vec3_to_json(stats.size_max)},
          {"location_min", vec3_to_json(stats.loc_min)},
          {"location_max", vec3_to_json(stats.loc_max)}};
}

NormalizationStats stats_from_json(const json& j) {
  NormalizationStats s;
  s.size_min = vec3_from_json(j.at("size_min"), "size_min");
  s.size_max = vec3_from_json(j.at("size_max"), "size_max");
  s.loc_min = vec3_from_json(j.at("location_min"), "location_min");
  s.loc_max = vec3_from_json(j.at("location_max"), "location_max");
  s.validate();
  return s;
}

void save_stats(const NormalizationStats& stats, const std::filesystem::path& path) {
  write_json_file(stats_to_json(stats), path);
}

NormalizationStats load_stats(const std::filesystem::path& path) {
  return stats_from_json(read_json_file(path));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  check(out.good(), "cannot write " + path.string());
  out << j.dump(2) << '\n';
  check(out.good(), "write failed for " + path.string());
}

}  // namespace scenediff
