#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scenediff/normalization.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {

// Scene JSON schema:
//   {"room_id": str, "room_type": str,
//    "objects": [{"class": str, "size": [x,y,z], "location": [x,y,z], "yaw": rad}]}
// Sizes are half-extents in meters.
nlohmann::json room_to_json(const Room& room);
Room room_from_json(const nlohmann::json& j);

void save_room(const Room& room, const std::filesystem::path& path);
Room load_room(const std::filesystem::path& path);

// A corpus split is a directory of one JSON file per room; rooms are loaded
// in lexicographic filename order so corpus-level results are reproducible.
void save_corpus_split(const std::vector<Room>& rooms, const std::filesystem::path& dir);
std::vector<Room> load_corpus_split(const std::filesystem::path& dir);

// Normalization stats sidecar.
nlohmann::json stats_to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const nlohmann::json& j);
void save_stats(const NormalizationStats& stats, const std::filesystem::path& path);
NormalizationStats load_stats(const std::filesystem::path& path);

// Small shared helpers.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace scenediff
