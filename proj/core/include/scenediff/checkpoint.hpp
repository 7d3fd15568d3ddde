#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "scenediff/ddpm.hpp"
#include "scenediff/nn/tensor.hpp"

namespace scenediff {

// Checkpoints are CBOR-encoded JSON documents; doubles survive the round
// trip bit-exactly, so reloaded models reproduce forward passes.
void save_cbor(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_cbor(const std::filesystem::path& path);

nlohmann::json params_to_json(const nn::ParamStore& params);

// The target store must hold exactly the stored names with matching shapes,
// i.e. the model is constructed from its config first, then filled in.
void params_from_json(const nlohmann::json& j, nn::ParamStore& params);

nlohmann::json schedule_to_json(const ddpm::NoiseSchedule& sched);
ddpm::NoiseSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace scenediff
