#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scenediff/ddpm.hpp"
#include "scenediff/nn/tensor.hpp"
#include "scenediff/normalization.hpp"
#include "scenediff/scene.hpp"
#include "scenediff/scene_tensor.hpp"
#include "scenediff/text.hpp"
#include "scenediff/train_common.hpp"

namespace scenediff {
namespace flgm {

// Stage one denoiser: a set transformer over per-object (size, category)
// tokens with text cross-attention. Tokens carry no positional encoding by
// default, which is what makes the model permutation-equivariant; the flag
// exists for the ablation that deliberately breaks that.
struct FdnConfig {
  int width = 64;         // token/channel width, shared with text embeddings
  int depth = 2;
  int heads = 4;
  int ffn_mult = 2;
  int input_hidden = 64;  // per-attribute input MLP hidden width
  bool positional_encoding = false;
  bool cross_attention = true;
};

struct FlgmModel {
  FdnConfig config;
  ddpm::NoiseSchedule sched;
  NormalizationStats stats;
  CategoryVocab vocab;
  TextVocab text_vocab;
  int n_max = 0;
  nn::ParamStore params;
  long step = 0;
};

FlgmModel init_flgm(const FdnConfig& config, const CategoryVocab& vocab,
                    const TextVocab& text_vocab, const NormalizationStats& stats,
                    const ddpm::NoiseSchedule& sched, int n_max, std::uint64_t seed);

// Token ids per example, padded to a shared length for batched attention.
struct TextBatch {
  std::vector<int> ids;     // batch * tokens_per_example, null-padded
  std::vector<char> valid;  // parallel validity flags for attention masking
  int batch = 0;
  int tokens_per_example = 0;

  static TextBatch make(const std::vector<std::vector<int>>& per_example, int null_id);
};

// eps prediction over the (size, category) columns. sc_t is
// (batch * n) x (3 + k) in corruption space, one transformer token per row.
nn::Tensor fdn_forward(const FdnConfig& config, nn::ParamStore& params,
                       const Eigen::MatrixXd& sc_t, const std::vector<int>& t,
                       const TextBatch& text, int batch);

// Noise MSE over the (s, c) columns of every row, empty rows included.
// Deterministic given the draw; prompts are ignored for examples the draw
// marks unconditional.
nn::Tensor flgm_loss_draw(FlgmModel& model, const std::vector<SceneTensor>& batch,
                          const std::vector<std::string>& prompts,
                          const DiffusionDraw& draw);

double flgm_loss(FlgmModel& model, const std::vector<Room>& rooms, Rng& rng,
                 double p_uncond = 0.1);

// Same corruption and reduction with a pluggable denoiser, for oracles.
using ScDenoiser =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& sc_t, const std::vector<int>& t)>;
double flgm_loss_value(const std::vector<SceneTensor>& batch, const ScDenoiser& denoiser,
                       const ddpm::NoiseSchedule& sched, const DiffusionDraw& draw);

// Ancestral sampling over the (s, c) columns; rows decoding to the empty
// class are dropped and sizes are denormalized. One scene per prompt,
// sampled as a single stacked batch.
std::vector<std::vector<FurnitureItem>> sample_furniture_lists(
    FlgmModel& model, const std::vector<std::string>& prompts, Rng& rng);
std::vector<FurnitureItem> sample_furniture_list(FlgmModel& model, const std::string& prompt,
                                                 Rng& rng);

std::vector<TrainLogRow> train_flgm(FlgmModel& model, const std::vector<Room>& rooms,
                                    const TrainConfig& config, Rng& rng);

void save_flgm(const FlgmModel& model, const std::filesystem::path& path);
FlgmModel load_flgm(const std::filesystem::path& path);

}  // namespace flgm
}  // namespace scenediff
