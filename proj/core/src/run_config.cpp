#include "scenediff/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "scenediff/common.hpp"
#include "scenediff/scene_io.hpp"

namespace scenediff {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& scope) {
  check(j.is_object(), "config: " + scope + " must be a JSON object");
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      fail("config: unknown key \"" + item.key() + "\" in " + scope);
}

template <typename T>
void maybe(const json& j, const char* key, T& out, const std::string& scope) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail("config: bad value for \"" + std::string(key) + "\" in " + scope + ": " + e.what());
  }
}

void parse_train(const json& j, TrainConfig& out, const std::string& scope) {
  reject_unknown(j, {"steps", "batch_size", "lr", "lr_halve_every", "p_uncond"}, scope);
  maybe(j, "steps", out.steps, scope);
  maybe(j, "batch_size", out.batch_size, scope);
  maybe(j, "lr", out.lr, scope);
  maybe(j, "lr_halve_every", out.lr_halve_every, scope);
  maybe(j, "p_uncond", out.p_uncond, scope);
}

json train_to_json(const TrainConfig& c) {
  return {{"steps", c.steps},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"lr_halve_every", c.lr_halve_every},
          {"p_uncond", c.p_uncond}};
}

}  // namespace

RunConfig preset_run_config(const std::string& name) {
  RunConfig cfg;
  cfg.preset = name;
  cfg.corpus = corpus::preset_config(name);  // throws for unknown names
  cfg.room_type = cfg.corpus.room_types.front().name;
  if (name == "desk") {
    cfg.corpus.room_count = 1200;
    cfg.corpus.expansion_factor = 2;
    cfg.n_max = 12;
    cfg.sample_count = 120;
    cfg.diffusion = {100, 1e-4, 0.2};
    cfg.train_flgm = {1200, 16, 1e-3, 400, 0.1};
    cfg.train_lgm = {1500, 16, 1e-3, 500, 0.1};
    cfg.raster = {32, 2.5};
  } else {
    cfg.n_max = 32;
    cfg.sample_count = 500;
    cfg.diffusion = {2000, 1e-4, 0.02};
    cfg.train_flgm = {210000, 64, 2e-5, 42000, 0.1};
    cfg.train_lgm = {210000, 64, 2e-5, 42000, 0.1};
    cfg.raster = {32, 4.0};
  }
  cfg.corpus.seed = cfg.seed;
  return cfg;
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown(j,
                 {"preset", "seed", "room_type", "n_max", "sample_count", "pointcloud_points",
                  "corpus", "diffusion", "fdn", "ldn", "train_flgm", "train_lgm", "raster"},
                 "the top level");
  std::string preset = "desk";
  maybe(j, "preset", preset, "the top level");
  RunConfig cfg = preset_run_config(preset);

  maybe(j, "seed", cfg.seed, "the top level");
  maybe(j, "room_type", cfg.room_type, "the top level");
  maybe(j, "n_max", cfg.n_max, "the top level");
  maybe(j, "sample_count", cfg.sample_count, "the top level");
  maybe(j, "pointcloud_points", cfg.pointcloud_points, "the top level");

  if (j.contains("corpus")) {
    const json& jc = j.at("corpus");
    reject_unknown(jc, {"room_count", "expansion_factor", "entries_per_category"}, "corpus");
    maybe(jc, "room_count", cfg.corpus.room_count, "corpus");
    maybe(jc, "expansion_factor", cfg.corpus.expansion_factor, "corpus");
    maybe(jc, "entries_per_category", cfg.corpus.entries_per_category, "corpus");
  }
  if (j.contains("diffusion")) {
    const json& jd = j.at("diffusion");
    reject_unknown(jd, {"timesteps", "beta_start", "beta_end"}, "diffusion");
    maybe(jd, "timesteps", cfg.diffusion.timesteps, "diffusion");
    maybe(jd, "beta_start", cfg.diffusion.beta_start, "diffusion");
    maybe(jd, "beta_end", cfg.diffusion.beta_end, "diffusion");
  }
  if (j.contains("fdn")) {
    const json& jf = j.at("fdn");
    reject_unknown(jf,
                   {"width", "depth", "heads", "ffn_mult", "input_hidden",
                    "positional_encoding", "cross_attention"},
                   "fdn");
    maybe(jf, "width", cfg.fdn.width, "fdn");
    maybe(jf, "depth", cfg.fdn.depth, "fdn");
    maybe(jf, "heads", cfg.fdn.heads, "fdn");
    maybe(jf, "ffn_mult", cfg.fdn.ffn_mult, "fdn");
    maybe(jf, "input_hidden", cfg.fdn.input_hidden, "fdn");
    maybe(jf, "positional_encoding", cfg.fdn.positional_encoding, "fdn");
    maybe(jf, "cross_attention", cfg.fdn.cross_attention, "fdn");
  }
  if (j.contains("ldn")) {
    const json& jl = j.at("ldn");
    reject_unknown(jl,
                   {"widths", "heads", "separate_heads", "lambda_box", "w_schedule",
                    "iou_sharpness"},
                   "ldn");
    maybe(jl, "widths", cfg.ldn.widths, "ldn");
    maybe(jl, "heads", cfg.ldn.heads, "ldn");
    maybe(jl, "separate_heads", cfg.ldn.separate_heads, "ldn");
    maybe(jl, "lambda_box", cfg.ldn.lambda_box, "ldn");
    maybe(jl, "w_schedule", cfg.ldn.w_schedule, "ldn");
    maybe(jl, "iou_sharpness", cfg.ldn.iou_sharpness, "ldn");
  }
  if (j.contains("train_flgm")) parse_train(j.at("train_flgm"), cfg.train_flgm, "train_flgm");
  if (j.contains("train_lgm")) parse_train(j.at("train_lgm"), cfg.train_lgm, "train_lgm");
  if (j.contains("raster")) {
    const json& jr = j.at("raster");
    reject_unknown(jr, {"resolution", "extent"}, "raster");
    maybe(jr, "resolution", cfg.raster.resolution, "raster");
    maybe(jr, "extent", cfg.raster.extent, "raster");
  }

  cfg.corpus.seed = cfg.seed;
  validate_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path));
}

json run_config_to_json(const RunConfig& cfg) {
  return {
      {"preset", cfg.preset},
      {"seed", cfg.seed},
      {"room_type", cfg.room_type},
      {"n_max", cfg.n_max},
      {"sample_count", cfg.sample_count},
      {"pointcloud_points", cfg.pointcloud_points},
      {"corpus",
       {{"room_count", cfg.corpus.room_count},
        {"expansion_factor", cfg.corpus.expansion_factor},
        {"entries_per_category", cfg.corpus.entries_per_category}}},
      {"diffusion",
       {{"timesteps", cfg.diffusion.timesteps},
        {"beta_start", cfg.diffusion.beta_start},
        {"beta_end", cfg.diffusion.beta_end}}},
      {"fdn",
       {{"width", cfg.fdn.width},
        {"depth", cfg.fdn.depth},
        {"heads", cfg.fdn.heads},
        {"ffn_mult", cfg.fdn.ffn_mult},
        {"input_hidden", cfg.fdn.input_hidden},
        {"positional_encoding", cfg.fdn.positional_encoding},
        {"cross_attention", cfg.fdn.cross_attention}}},
      {"ldn",
       {{"widths", cfg.ldn.widths},
        {"heads", cfg.ldn.heads},
        {"separate_heads", cfg.ldn.separate_heads},
        {"lambda_box", cfg.ldn.lambda_box},
        {"w_schedule", cfg.ldn.w_schedule},
        {"iou_sharpness", cfg.ldn.iou_sharpness}}},
      {"train_flgm", train_to_json(cfg.train_flgm)},
      {"train_lgm", train_to_json(cfg.train_lgm)},
      {"raster", {{"resolution", cfg.raster.resolution}, {"extent", cfg.raster.extent}}},
  };
}

void validate_run_config(const RunConfig& cfg) {
  corpus::validate_config(cfg.corpus);
  check(cfg.n_max > 0 && cfg.n_max % 4 == 0,
        "config: n_max must be a positive multiple of 4");
  bool known_type = false;
  for (const auto& type : cfg.corpus.room_types) {
    if (type.name == cfg.room_type) known_type = true;
    check(cfg.n_max >= type.count_max, "config: n_max " + std::to_string(cfg.n_max) +
                                           " is below the " + type.name + " object cap " +
                                           std::to_string(type.count_max));
  }
  check(known_type, "config: unknown room_type \"" + cfg.room_type + "\"");
  check(cfg.sample_count >= 1, "config: sample_count must be at least 1");
  check(cfg.pointcloud_points >= 1, "config: pointcloud_points must be at least 1");
  check(cfg.diffusion.timesteps >= 1, "config: diffusion needs at least one timestep");
  check(cfg.diffusion.beta_start > 0.0 && cfg.diffusion.beta_start <= cfg.diffusion.beta_end &&
            cfg.diffusion.beta_end < 1.0,
        "config: betas must satisfy 0 < beta_start <= beta_end < 1");
  for (const TrainConfig* t : {&cfg.train_flgm, &cfg.train_lgm}) {
    check(t->steps >= 1 && t->batch_size >= 1 && t->lr > 0.0 && t->lr_halve_every >= 0,
          "config: training needs positive steps, batch size, and lr");
    check(t->p_uncond >= 0.0 && t->p_uncond <= 1.0, "config: p_uncond must be in [0, 1]");
  }
  check(cfg.fdn.heads > 0 && cfg.fdn.width % cfg.fdn.heads == 0,
        "config: fdn heads must divide fdn width");
  check(cfg.ldn.widths.size() == 3, "config: ldn widths must list stem, mid, bottleneck");
  for (int w : cfg.ldn.widths) check(w > 0, "config: ldn widths must be positive");
  check(cfg.ldn.heads > 0 && cfg.ldn.widths[2] % cfg.ldn.heads == 0,
        "config: ldn heads must divide the bottleneck width");
}

std::vector<std::string> ablation_names() {
  return {"final", "first w/ pos", "second single-head", "second w/o separate"};
}

RunConfig apply_ablation(RunConfig cfg, const std::string& name) {
  if (name == "final") return cfg;
  if (name == "first w/ pos") {
    cfg.fdn.positional_encoding = true;
    return cfg;
  }
  if (name == "second single-head") {
    cfg.ldn.heads = 1;
    return cfg;
  }
  if (name == "second w/o separate") {
    cfg.ldn.separate_heads = false;
    return cfg;
  }
  std::string valid;
  for (const auto& known : ablation_names()) valid += " \"" + known + "\"";
  fail("unknown ablation \"" + name + "\"; valid names are" + valid);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string dump = run_config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json manifest_json(const std::string& command, const RunConfig& cfg) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return {{"command", command},
          {"config", run_config_to_json(cfg)},
          {"config_hash", std::string(hex)},
          {"seed", cfg.seed},
          {"version", kVersion}};
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const RunConfig& cfg) {
  std::filesystem::create_directories(out_dir / "manifests");
  write_json_file(manifest_json(command, cfg), out_dir / "manifests" / (command + ".json"));
}

}  // namespace scenediff
