#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scenediff/corpus.hpp"
#include "scenediff/flgm.hpp"
#include "scenediff/lgm.hpp"
#include "scenediff/metrics.hpp"
#include "scenediff/train_common.hpp"

namespace scenediff {

struct DiffusionConfig {
  int timesteps = 100;
  double beta_start = 1e-4;
  double beta_end = 0.2;
};

// Everything a pipeline run needs, in one serializable blob. Presets fill
// every field; a config file then overrides individual knobs. The corpus
// section only exposes the scalar knobs; category and room-type structure
// always comes from the preset so the two stages and the retrieval database
// can never disagree about the vocabulary.
struct RunConfig {
  std::string preset = "desk";
  std::uint64_t seed = 0;
  std::string room_type;  // which per-type model pair to train and sample
  int n_max = 12;         // scene tensor rows, must be divisible by 4
  int sample_count = 120;
  int pointcloud_points = 30000;
  corpus::CorpusConfig corpus;
  DiffusionConfig diffusion;
  flgm::FdnConfig fdn;
  lgm::LdnConfig ldn;
  TrainConfig train_flgm;
  TrainConfig train_lgm;
  metrics::RasterSettings raster;
};

// "desk" runs the whole pipeline on one core in well under half an hour;
// "paper" records the full-scale settings and is not meant to be trained
// here.
RunConfig preset_run_config(const std::string& name);

// Strict: unknown keys anywhere are errors, so a typo cannot silently fall
// back to a default.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& config);

void validate_run_config(const RunConfig& config);

// Named model variants. "final" is the unmodified pipeline; the others each
// flip one architectural switch.
std::vector<std::string> ablation_names();
RunConfig apply_ablation(RunConfig config, const std::string& name);

// FNV-1a over the canonical JSON dump. Stable across runs by construction.
std::uint64_t config_hash(const RunConfig& config);

// Every command drops one of these next to its outputs: the command name,
// the full resolved config, its hash, the seed, and the code version.
// Deliberately no timestamps, so reruns are byte-identical.
nlohmann::json manifest_json(const std::string& command, const RunConfig& config);
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const RunConfig& config);

}  // namespace scenediff
