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
#include "scenediff/train_common.hpp"

namespace scenediff {
namespace lgm {

// Stage two denoiser: a 1D conv encoder-decoder over the padded object axis
// (two downsample stages, attention at the bottleneck, skip connections),
// predicting noise on the location and rotation columns while the clean
// (size, category) columns ride along as conditioning.
struct LdnConfig {
  std::vector<int> widths = {48, 96, 96};  // stem, mid, bottleneck channels
  int heads = 4;
  bool separate_heads = true;  // distinct location and rotation projections
  double lambda_box = 0.1;
  std::string w_schedule = "alpha_bar";  // overlap-penalty weight per t
  double iou_sharpness = 50.0;
};

struct LgmModel {
  LdnConfig config;
  ddpm::NoiseSchedule sched;
  NormalizationStats stats;
  CategoryVocab vocab;
  int n_max = 0;
  nn::ParamStore params;
  long step = 0;
};

LgmModel init_lgm(const LdnConfig& config, const CategoryVocab& vocab,
                  const NormalizationStats& stats, const ddpm::NoiseSchedule& sched,
                  int n_max, std::uint64_t seed);

double box_weight_at(const LdnConfig& config, const ddpm::NoiseSchedule& sched, int t);

// eps prediction over the five (location, rotation) columns. x_full is
// (batch * n) x (8 + k) with clean (s, c) and diffused (l, r) columns; n
// must be divisible by 4 for the two pooling stages.
nn::Tensor ldn_forward(const LdnConfig& config, nn::ParamStore& params,
                       const Eigen::MatrixXd& x_full, const std::vector<int>& t, int batch);

// Differentiable overlap penalty on reconstructed (l, r) columns:
// (1/batch) * sum_e weight[e] * sum_{i<j active} smooth IoU of the boxes
// with the given half extents. Gradients flow into x0_lr only.
nn::Tensor iou_penalty(const nn::Tensor& x0_lr, const std::vector<Eigen::Vector3d>& half_extents,
                       const std::vector<char>& active, const std::vector<double>& weight,
                       int batch, const NormalizationStats& stats, double sharpness);

struct LgmLoss {
  nn::Tensor total;  // l_lr + lambda * l_box, differentiable
  double l_lr = 0.0;
  double l_box = 0.0;
};

// Noise MSE on (l, r) over non-empty rows plus the weighted overlap penalty
// on the reconstructed clean layout. Deterministic given the draw.
LgmLoss lgm_loss_draw(LgmModel& model, const std::vector<SceneTensor>& batch,
                      const DiffusionDraw& draw);

// (total, l_lr, l_box) on a random draw.
struct LgmLossValue {
  double total = 0.0;
  double l_lr = 0.0;
  double l_box = 0.0;
};
LgmLossValue lgm_loss(LgmModel& model, const std::vector<Room>& rooms, Rng& rng);

// Pluggable-denoiser variant for oracles; the denoiser sees the same
// x_full layout as ldn_forward and returns the five-column prediction.
using LrDenoiser =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x_full, const std::vector<int>& t)>;
LgmLossValue lgm_loss_value(const std::vector<SceneTensor>& batch, const LrDenoiser& denoiser,
                            const ddpm::NoiseSchedule& sched, const DiffusionDraw& draw,
                            const NormalizationStats& stats, double lambda_box,
                            const std::string& w_schedule, double sharpness = 50.0);

struct PlacedObject {
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

// Ancestral sampling of (l, r) with the (s, c) columns locked to the given
// furniture; output order matches the input list. One scene per list,
// sampled as a single stacked batch.
std::vector<std::vector<PlacedObject>> sample_layouts(
    LgmModel& model, const std::vector<std::vector<FurnitureItem>>& lists, Rng& rng);
std::vector<PlacedObject> sample_layout(LgmModel& model,
                                        const std::vector<FurnitureItem>& furniture, Rng& rng);

std::vector<TrainLogRow> train_lgm(LgmModel& model, const std::vector<Room>& rooms,
                                   const TrainConfig& config, Rng& rng);

void save_lgm(const LgmModel& model, const std::filesystem::path& path);
LgmModel load_lgm(const std::filesystem::path& path);

}  // namespace lgm
}  // namespace scenediff
