#include "scenediff/cli.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scenediff/common.hpp"
#include "scenediff/corpus.hpp"
#include "scenediff/flgm.hpp"
#include "scenediff/frs.hpp"
#include "scenediff/lgm.hpp"
#include "scenediff/metrics.hpp"
#include "scenediff/pointcloud.hpp"
#include "scenediff/raster.hpp"
#include "scenediff/rng.hpp"
#include "scenediff/run_config.hpp"
#include "scenediff/scene_io.hpp"
#include "scenediff/text.hpp"

namespace scenediff {
namespace cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_out() {
  const char* env = std::getenv("SCENEDIFF_OUT");
  return env ? env : "out";
}

// "first w/ pos" -> "first-w-pos", for use in file names
std::string slug(const std::string& name) {
  std::string out;
  bool gap = false;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (gap && !out.empty()) out += '-';
      gap = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      gap = true;
    }
  }
  return out;
}

struct Opts {
  std::string config_path;
  std::string preset;
  std::string out = default_out();
  std::string room_type;
  std::string ablation = "final";
  std::uint64_t seed = 0;
  bool render = false;
  std::string prompt;
  std::string room_file;
  std::string generated_dir;
  std::string reference_dir;
  std::string stats_dir;
};

void add_common(CLI::App* sub, Opts& o) {
  auto* config = sub->add_option("--config", o.config_path, "run config JSON file");
  auto* preset = sub->add_option("--preset", o.preset, "built-in config: desk or paper");
  config->excludes(preset);
  sub->add_option("--seed", o.seed, "override the config seed");
  sub->add_option("--out", o.out, "output root (default $SCENEDIFF_OUT or ./out)");
  sub->add_option("--room-type", o.room_type, "override the config room type");
  sub->add_option("--ablation", o.ablation, "model variant to run")->capture_default_str();
}

RunConfig resolve_config(const Opts& o, const CLI::App* sub) {
  RunConfig cfg = o.config_path.empty()
                      ? preset_run_config(o.preset.empty() ? "desk" : o.preset)
                      : load_run_config(o.config_path);
  if (sub->count("--seed") > 0) {
    cfg.seed = o.seed;
    cfg.corpus.seed = o.seed;
  }
  if (!o.room_type.empty()) cfg.room_type = o.room_type;
  cfg = apply_ablation(std::move(cfg), o.ablation);
  validate_run_config(cfg);
  return cfg;
}

std::vector<std::string> category_names(const corpus::CorpusConfig& corpus) {
  std::vector<std::string> names;
  names.reserve(corpus.categories.size());
  for (const auto& spec : corpus.categories) names.push_back(spec.name);
  return names;
}

std::vector<std::string> room_type_names(const corpus::CorpusConfig& corpus) {
  std::vector<std::string> names;
  names.reserve(corpus.room_types.size());
  for (const auto& type : corpus.room_types) names.push_back(type.name);
  return names;
}

// Model file stem; ablated variants get their own checkpoints.
std::string model_stem(const std::string& stage, const RunConfig& cfg,
                       const std::string& ablation) {
  std::string stem = stage + "-" + cfg.room_type;
  if (ablation != "final") stem += "-" + slug(ablation);
  return stem;
}

fs::path samples_dir(const fs::path& out, const RunConfig& cfg, const std::string& ablation) {
  std::string leaf = cfg.room_type;
  if (ablation != "final") leaf += "-" + slug(ablation);
  return out / "samples" / leaf;
}

// Augmented rooms when augment has run, raw templates otherwise.
std::vector<Room> load_training_rooms(const fs::path& out, const std::string& room_type) {
  const fs::path aug = out / "corpus" / "train_aug";
  const fs::path dir = fs::is_directory(aug) ? aug : out / "corpus" / "train";
  std::vector<Room> rooms;
  for (Room& room : load_corpus_split(dir))
    if (room.room_type == room_type) rooms.push_back(std::move(room));
  check(!rooms.empty(), "no " + room_type + " rooms under " + dir.string() +
                            "; run gen-corpus first or fix --room-type");
  return rooms;
}

void write_loss_log(const std::vector<TrainLogRow>& log, const fs::path& path) {
  json rows = json::array();
  for (const auto& row : log)
    rows.push_back({{"step", row.step}, {"loss", row.loss}, {"lr", row.lr}});
  write_json_file(rows, path);
}

int cmd_gen_corpus(const RunConfig& cfg, const fs::path& out) {
  const auto db = corpus::build_database(cfg.corpus, cfg.seed);
  const auto rooms = corpus::generate_corpus(cfg.corpus, db);
  std::vector<Room> train, test;
  for (std::size_t i = 0; i < rooms.size(); ++i)
    (i % 10 == 9 ? test : train).push_back(rooms[i]);

  fs::remove_all(out / "corpus" / "train");
  fs::remove_all(out / "corpus" / "test");
  fs::remove_all(out / "corpus" / "train_aug");
  save_corpus_split(train, out / "corpus" / "train");
  save_corpus_split(test, out / "corpus" / "test");
  frs::save_database(db, out / "database");
  save_stats(NormalizationStats::fit(train), out / "corpus" / "stats.json");
  write_manifest(out, "gen-corpus", cfg);

  std::cout << corpus::stats_table(corpus::corpus_stats(rooms));
  std::cout << "wrote " << train.size() << " train and " << test.size() << " test rooms, "
            << db.entries.size() << " database entries\n";
  return 0;
}

int cmd_augment(const RunConfig& cfg, const fs::path& out) {
  const auto db = frs::load_database(out / "database");
  const auto train = load_corpus_split(out / "corpus" / "train");
  std::vector<std::string> warnings;
  const auto expanded =
      corpus::expand_corpus(train, db, cfg.corpus.expansion_factor, cfg.seed, {}, &warnings);
  fs::remove_all(out / "corpus" / "train_aug");
  save_corpus_split(expanded, out / "corpus" / "train_aug");
  write_manifest(out, "augment", cfg);

  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "expanded " << train.size() << " templates to " << expanded.size()
            << " rooms\n";
  return 0;
}

int cmd_train_flgm(const RunConfig& cfg, const fs::path& out, const std::string& ablation) {
  const auto rooms = load_training_rooms(out, cfg.room_type);
  const auto stats = NormalizationStats::fit(rooms);
  const CategoryVocab vocab(category_names(cfg.corpus));
  const TextVocab text_vocab = TextVocab::build(
      prompt_phrases(room_type_names(cfg.corpus), category_names(cfg.corpus), cfg.n_max));
  const auto sched = ddpm::NoiseSchedule::linear(cfg.diffusion.timesteps,
                                                 cfg.diffusion.beta_start,
                                                 cfg.diffusion.beta_end);
  auto model = flgm::init_flgm(cfg.fdn, vocab, text_vocab, stats, sched, cfg.n_max,
                               Rng::mix(cfg.seed, 0x666c676du));
  Rng rng(Rng::mix(cfg.seed, 0x74726e31u));
  const auto log = flgm::train_flgm(model, rooms, cfg.train_flgm, rng);

  const std::string stem = model_stem("flgm", cfg, ablation);
  fs::create_directories(out / "models");
  flgm::save_flgm(model, out / "models" / (stem + ".ckpt"));
  write_loss_log(log, out / "models" / (stem + "-loss.json"));
  write_manifest(out, "train-flgm", cfg);

  std::cout << "trained " << stem << " on " << rooms.size() << " rooms: loss "
            << log.front().loss << " -> " << log.back().loss << "\n";
  return 0;
}

int cmd_train_lgm(const RunConfig& cfg, const fs::path& out, const std::string& ablation) {
  const auto rooms = load_training_rooms(out, cfg.room_type);
  const auto stats = NormalizationStats::fit(rooms);
  const CategoryVocab vocab(category_names(cfg.corpus));
  const auto sched = ddpm::NoiseSchedule::linear(cfg.diffusion.timesteps,
                                                 cfg.diffusion.beta_start,
                                                 cfg.diffusion.beta_end);
  auto model =
      lgm::init_lgm(cfg.ldn, vocab, stats, sched, cfg.n_max, Rng::mix(cfg.seed, 0x6c676d31u));
  Rng rng(Rng::mix(cfg.seed, 0x74726e32u));
  const auto log = lgm::train_lgm(model, rooms, cfg.train_lgm, rng);

  const std::string stem = model_stem("lgm", cfg, ablation);
  fs::create_directories(out / "models");
  lgm::save_lgm(model, out / "models" / (stem + ".ckpt"));
  write_loss_log(log, out / "models" / (stem + "-loss.json"));
  write_manifest(out, "train-lgm", cfg);

  std::cout << "trained " << stem << " on " << rooms.size() << " rooms: loss "
            << log.front().loss << " -> " << log.back().loss << "\n";
  return 0;
}

int cmd_sample(const RunConfig& cfg, const fs::path& out, const std::string& ablation,
               const std::string& prompt, bool render) {
  auto fmodel = flgm::load_flgm(out / "models" / (model_stem("flgm", cfg, ablation) + ".ckpt"));
  auto lmodel = lgm::load_lgm(out / "models" / (model_stem("lgm", cfg, ablation) + ".ckpt"));
  const auto db = frs::load_database(out / "database");

  Rng rng(Rng::mix(cfg.seed, 0x73616d70u));
  const std::vector<std::string> prompts(cfg.sample_count, prompt);
  const auto lists = flgm::sample_furniture_lists(fmodel, prompts, rng);

  // retrieval bridges the stages: stage two only ever sees canonical sizes
  std::vector<std::vector<FurnitureItem>> retrieved(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i)
    for (const auto& item : lists[i]) {
      const auto hit = frs::retrieve(item.half_size, item.category, db);
      retrieved[i].push_back({hit.category, hit.size});
    }
  const auto layouts = lgm::sample_layouts(lmodel, retrieved, rng);

  const fs::path dir = samples_dir(out, cfg, ablation);
  fs::remove_all(dir);
  std::vector<Room> rooms(lists.size());
  long empty = 0;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "sample-%04zu", i);
    rooms[i].room_id = id;
    rooms[i].room_type = cfg.room_type;
    for (std::size_t k = 0; k < retrieved[i].size(); ++k)
      rooms[i].objects.push_back({retrieved[i][k].category, retrieved[i][k].half_size,
                                  layouts[i][k].location, layouts[i][k].yaw});
    if (rooms[i].objects.empty()) ++empty;
  }
  save_corpus_split(rooms, dir);
  if (render) {
    for (const Room& room : rooms) {
      std::vector<std::string> warnings;
      const auto map = rasterize_topdown(room, cfg.raster.resolution, cfg.raster.extent,
                                         &warnings);
      save_png(map, dir / (room.room_id + ".png"));
    }
  }
  write_manifest(out, "sample", cfg);

  std::cout << "sampled " << rooms.size() << " " << cfg.room_type << " scenes to "
            << dir.string() << " (" << empty << " empty)\n";
  return 0;
}

int cmd_pointcloud(const RunConfig& cfg, const fs::path& out, const std::string& ablation,
                   const std::string& room_file) {
  const auto db = frs::load_database(out / "database");
  const std::vector<Room> rooms = room_file.empty()
                                      ? load_corpus_split(samples_dir(out, cfg, ablation))
                                      : std::vector<Room>{load_room(room_file)};
  fs::create_directories(out / "pointclouds");
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const auto cloud =
        sample_pointcloud(rooms[i], db, cfg.pointcloud_points, Rng::mix(cfg.seed, i));
    save_ply(cloud, out / "pointclouds" / (rooms[i].room_id + ".ply"));
  }
  write_manifest(out, "pointcloud", cfg);
  std::cout << "wrote " << rooms.size() << " point clouds\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& out, const std::string& ablation,
                 std::string generated_dir, std::string reference_dir) {
  if (generated_dir.empty()) generated_dir = samples_dir(out, cfg, ablation).string();
  if (reference_dir.empty()) reference_dir = (out / "corpus" / "test").string();

  auto keep_type = [&](std::vector<Room> rooms) {
    std::vector<Room> kept;
    for (Room& room : rooms)
      if (room.room_type == cfg.room_type) kept.push_back(std::move(room));
    return kept;
  };
  const auto generated = keep_type(load_corpus_split(generated_dir));
  const auto reference = keep_type(load_corpus_split(reference_dir));

  const auto report = metrics::evaluate_corpora(generated, reference, cfg.seed, cfg.raster);
  const std::string text = metrics::report_to_json(report);

  std::string leaf = cfg.room_type;
  if (ablation != "final") leaf += "-" + slug(ablation);
  fs::create_directories(out / "eval");
  std::ofstream file(out / "eval" / (leaf + ".json"));
  file << text << "\n";
  check(file.good(), "evaluate: failed to write the report");
  file.close();
  write_manifest(out, "evaluate", cfg);

  std::cout << text << "\n";
  return 0;
}

int cmd_stats(const fs::path& out, std::string dir) {
  if (dir.empty()) dir = (out / "corpus" / "train").string();
  std::cout << corpus::stats_table(corpus::corpus_stats(load_corpus_split(dir)));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  Opts o;
  CLI::App app{"two-stage diffusion scene layout pipeline"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-corpus", "generate room templates and the size database");
  auto* aug = app.add_subcommand("augment", "expand the train split by rotation and swaps");
  auto* tf = app.add_subcommand("train-flgm", "train the stage one furniture list model");
  auto* tl = app.add_subcommand("train-lgm", "train the stage two layout model");
  auto* smp = app.add_subcommand("sample", "sample scenes through both stages");
  auto* pcl = app.add_subcommand("pointcloud", "export labeled point clouds");
  auto* evl = app.add_subcommand("evaluate", "score generated scenes against a reference split");
  auto* sts = app.add_subcommand("stats", "print corpus statistics");

  for (CLI::App* sub : {gen, aug, tf, tl, smp, pcl, evl}) add_common(sub, o);
  smp->add_option("--prompt", o.prompt, "text condition; empty samples unconditionally");
  smp->add_flag("--render", o.render, "also write top-down PNGs");
  pcl->add_option("--room", o.room_file, "one scene JSON (default: every sampled scene)");
  evl->add_option("--generated", o.generated_dir, "generated split (default: the samples)");
  evl->add_option("--reference", o.reference_dir, "reference split (default: the test split)");
  sts->add_option("--out", o.out, "output root (default $SCENEDIFF_OUT or ./out)");
  sts->add_option("--dir", o.stats_dir, "corpus split to report (default: the train split)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const fs::path out = o.out;
    if (sts->parsed()) return cmd_stats(out, o.stats_dir);
    const CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = resolve_config(o, sub);
    if (gen->parsed()) return cmd_gen_corpus(cfg, out);
    if (aug->parsed()) return cmd_augment(cfg, out);
    if (tf->parsed()) return cmd_train_flgm(cfg, out, o.ablation);
    if (tl->parsed()) return cmd_train_lgm(cfg, out, o.ablation);
    if (smp->parsed()) return cmd_sample(cfg, out, o.ablation, o.prompt, o.render);
    if (pcl->parsed()) return cmd_pointcloud(cfg, out, o.ablation, o.room_file);
    if (evl->parsed()) return cmd_evaluate(cfg, out, o.ablation, o.generated_dir, o.reference_dir);
    fail("unreachable subcommand state");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cli
}  // namespace scenediff
