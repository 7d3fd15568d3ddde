#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "scenediff/cli.hpp"
#include "scenediff/lgm.hpp"
#include "scenediff/scene.hpp"
#include "scenediff/scene_io.hpp"

using namespace scenediff;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// commands print progress; keep the test log quiet and inspectable
int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  std::streambuf* o = std::cout.rdbuf(out.rdbuf());
  std::streambuf* e = std::cerr.rdbuf(err.rdbuf());
  const int rc = cli::run_cli(args);
  std::cout.rdbuf(o);
  std::cerr.rdbuf(e);
  if (out_text) *out_text = out.str();
  return rc;
}

fs::path case_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "scenediff-cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json tiny_config(int room_count, int steps) {
  return {{"preset", "desk"},
          {"seed", 5},
          {"sample_count", 4},
          {"corpus",
           {{"room_count", room_count}, {"expansion_factor", 2}, {"entries_per_category", 2}}},
          {"diffusion", {{"timesteps", 12}}},
          {"fdn", {{"width", 16}, {"depth", 1}, {"heads", 2}, {"input_hidden", 16}}},
          {"ldn", {{"widths", {8, 12, 16}}, {"heads", 2}}},
          {"train_flgm", {{"steps", steps}, {"batch_size", 4}}},
          {"train_lgm", {{"steps", steps}, {"batch_size", 4}}},
          {"raster", {{"resolution", 16}}}};
}

std::vector<std::string> with_run(const fs::path& dir, std::vector<std::string> args) {
  args.insert(args.end(), {"--config", (dir / "config.json").string(), "--out",
                           (dir / "run").string()});
  return args;
}

// one end-to-end run shared by the cases below
const fs::path& pipeline_dir() {
  static const fs::path dir = [] {
    const fs::path d = case_dir("pipeline");
    write_json_file(tiny_config(60, 6), d / "config.json");
    for (const char* command :
         {"gen-corpus", "augment", "train-flgm", "train-lgm", "sample", "pointcloud"}) {
      std::vector<std::string> args = {command};
      if (std::string(command) == "sample") args.push_back("--render");
      REQUIRE(run(with_run(d, args)) == 0);
    }
    return d;
  }();
  return dir;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("stats reports a hand-built split") {
  const fs::path dir = case_dir("stats");
  Room a{"a", "den", {{"sofa", {0.8, 0.4, 0.4}, {0, 0, 0.4}, 0.0}}};
  Room b{"b", "den",
         {{"sofa", {0.8, 0.4, 0.4}, {1, 1, 0.4}, 0.0},
          {"lamp", {0.1, 0.1, 0.6}, {-1, 1, 0.6}, 0.0}}};
  save_corpus_split({a, b}, dir / "split");

  std::string text;
  CHECK(run({"stats", "--dir", (dir / "split").string()}, &text) == 0);
  CHECK(text.find("den") != std::string::npos);
  CHECK(text.find("total rooms 2") != std::string::npos);
  CHECK(text.find("sofa") != std::string::npos);
}

TEST_CASE("bad invocations exit nonzero") {
  const fs::path dir = case_dir("bad");
  CHECK(run({}) != 0);
  CHECK(run({"--help"}) == 0);
  CHECK(run({"no-such-command"}) != 0);
  CHECK(run({"sample", "--config", (dir / "nope.json").string()}) == 1);

  write_json_file({{"bogus", 1}}, dir / "bad_key.json");
  CHECK(run({"gen-corpus", "--config", (dir / "bad_key.json").string(),
             "--out", (dir / "run").string()}) == 1);

  CHECK(run({"gen-corpus", "--preset", "desk", "--config", (dir / "bad_key.json").string()}) !=
        0);  // mutually exclusive
  CHECK(run({"train-flgm", "--ablation", "junk", "--out", (dir / "run").string()}) == 1);
  CHECK(run({"evaluate", "--out", (dir / "empty").string()}) == 1);
}

TEST_CASE("pipeline writes corpus, models, samples, and manifests") {
  const fs::path run_dir = pipeline_dir() / "run";

  CHECK(fs::is_directory(run_dir / "corpus" / "train"));
  CHECK(fs::is_directory(run_dir / "corpus" / "train_aug"));
  CHECK(fs::exists(run_dir / "corpus" / "stats.json"));
  CHECK(fs::exists(run_dir / "database" / "database.json"));
  CHECK(fs::exists(run_dir / "models" / "flgm-office.ckpt"));
  CHECK(fs::exists(run_dir / "models" / "lgm-office.ckpt"));
  CHECK(fs::exists(run_dir / "models" / "flgm-office-loss.json"));
  CHECK(fs::exists(run_dir / "samples" / "office" / "sample-0000.json"));
  CHECK(fs::exists(run_dir / "samples" / "office" / "sample-0003.json"));
  CHECK(fs::exists(run_dir / "samples" / "office" / "sample-0000.png"));
  for (const char* name : {"gen-corpus", "augment", "train-flgm", "train-lgm", "sample",
                           "pointcloud"})
    CHECK(fs::exists(run_dir / "manifests" / (std::string(name) + ".json")));

  int clouds = 0;
  for (const auto& entry : fs::directory_iterator(run_dir / "pointclouds"))
    clouds += entry.path().extension() == ".ply";
  CHECK(clouds == 4);

  const json manifest = read_json_file(run_dir / "manifests" / "gen-corpus.json");
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("config").at("seed") == 5);
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);

  const json log = read_json_file(run_dir / "models" / "flgm-office-loss.json");
  REQUIRE(log.size() == 6);
  CHECK(log.front().at("step") == 1);
  CHECK(log.back().at("step") == 6);
}

TEST_CASE("sampling twice gives byte-identical scenes") {
  const fs::path run_dir = pipeline_dir() / "run";
  const fs::path scene = run_dir / "samples" / "office" / "sample-0002.json";
  const fs::path image = run_dir / "samples" / "office" / "sample-0002.png";
  const std::string scene_before = file_bytes(scene);
  const std::string image_before = file_bytes(image);

  REQUIRE(run(with_run(pipeline_dir(), {"sample", "--render"})) == 0);
  CHECK(file_bytes(scene) == scene_before);
  CHECK(file_bytes(image) == image_before);
}

TEST_CASE("the seed flag overrides the config seed") {
  const fs::path dir = case_dir("seed");
  write_json_file(tiny_config(20, 6), dir / "config.json");
  REQUIRE(run(with_run(dir, {"gen-corpus", "--seed", "7"})) == 0);

  const json manifest = read_json_file(dir / "run" / "manifests" / "gen-corpus.json");
  CHECK(manifest.at("seed") == 7);
  CHECK(manifest.at("config").at("seed") == 7);

  // a different corpus seed must produce different room ids
  pipeline_dir();
  bool any_shared = false;
  for (const auto& entry : fs::directory_iterator(dir / "run" / "corpus" / "train"))
    any_shared |= fs::exists(pipeline_dir() / "run" / "corpus" / "train" /
                             entry.path().filename());
  CHECK_FALSE(any_shared);
}

TEST_CASE("ablation variants train under their own names") {
  const fs::path dir = pipeline_dir();
  REQUIRE(run(with_run(dir, {"train-lgm", "--ablation", "second single-head"})) == 0);

  const fs::path ckpt = dir / "run" / "models" / "lgm-office-second-single-head.ckpt";
  REQUIRE(fs::exists(ckpt));
  CHECK(lgm::load_lgm(ckpt).config.heads == 1);
  CHECK(fs::exists(dir / "run" / "models" / "lgm-office.ckpt"));  // baseline untouched
}

TEST_CASE("evaluate sits at chance on a reference-vs-reference split") {
  const fs::path dir = case_dir("evaluate");
  write_json_file(tiny_config(1100, 6), dir / "config.json");
  REQUIRE(run(with_run(dir, {"gen-corpus"})) == 0);

  const auto train = load_corpus_split(dir / "run" / "corpus" / "train");
  REQUIRE(train.size() >= 200);
  std::vector<Room> half_a, half_b;
  for (std::size_t i = 0; i < train.size(); ++i)
    (i % 2 == 0 ? half_a : half_b).push_back(train[i]);
  save_corpus_split(half_a, dir / "half_a");
  save_corpus_split(half_b, dir / "half_b");

  auto args = with_run(dir, {"evaluate", "--generated", (dir / "half_a").string(),
                             "--reference", (dir / "half_b").string()});
  REQUIRE(run(args) == 0);

  const json report = read_json_file(dir / "run" / "eval" / "office.json");
  CHECK(report.at("n_generated").get<long>() == static_cast<long>(half_a.size()));
  const double sca = report.at("sca").get<double>();
  CHECK(sca >= 45.0);
  CHECK(sca <= 55.0);
  CHECK(report.at("ckl").get<double>() < 0.01);
  CHECK(report.at("ckl").get<double>() >= 0.0);

  // byte-identical rerun, manifest included
  const std::string before = file_bytes(dir / "run" / "eval" / "office.json");
  REQUIRE(run(args) == 0);
  CHECK(file_bytes(dir / "run" / "eval" / "office.json") == before);
}

TEST_SUITE_END();
