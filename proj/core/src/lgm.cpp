#include "scenediff/lgm.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "scenediff/checkpoint.hpp"
#include "scenediff/common.hpp"
#include "scenediff/geometry.hpp"
#include "scenediff/nn/adam.hpp"
#include "scenediff/scene_io.hpp"

namespace scenediff {
namespace lgm {

namespace {

using nn::Tensor;

void make_linear(nn::ParamStore& params, const std::string& name, int in, int out, Rng& rng) {
  params.create(name + ".w", in, out, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  params.create_fill(name + ".b", 1, out, 0.0);
}

Tensor linear(nn::ParamStore& params, const std::string& name, const Tensor& x) {
  return nn::affine(x, params.get(name + ".w"), params.get(name + ".b"));
}

void make_layernorm(nn::ParamStore& params, const std::string& name, int width) {
  params.create_fill(name + ".g", 1, width, 1.0);
  params.create_fill(name + ".b", 1, width, 0.0);
}

Tensor ln(nn::ParamStore& params, const std::string& name, const Tensor& x) {
  return nn::layernorm(x, params.get(name + ".g"), params.get(name + ".b"));
}

void make_conv(nn::ParamStore& params, const std::string& name, int width, Rng& rng) {
  const double s = 1.0 / std::sqrt(3.0 * width);
  params.create(name + ".wp", width, width, s, rng);
  params.create(name + ".ws", width, width, s, rng);
  params.create(name + ".wn", width, width, s, rng);
  params.create_fill(name + ".b", 1, width, 0.0);
}

Tensor conv(nn::ParamStore& params, const std::string& name, const Tensor& x, int batch) {
  return nn::conv1d_k3(x, params.get(name + ".wp"), params.get(name + ".ws"),
                       params.get(name + ".wn"), params.get(name + ".b"), batch);
}

// Residual block: x + conv(silu(conv(norm(x)) + time)).
void make_block(nn::ParamStore& params, const std::string& name, int width, int time_dim,
                Rng& rng) {
  make_layernorm(params, name + ".ln", width);
  make_conv(params, name + ".c1", width, rng);
  make_linear(params, name + ".tp", time_dim, width, rng);
  make_conv(params, name + ".c2", width, rng);
}

Tensor block(nn::ParamStore& params, const std::string& name, const Tensor& x, const Tensor& te,
             int batch) {
  Tensor h = conv(params, name + ".c1", ln(params, name + ".ln", x), batch);
  h = nn::add_per_example(h, linear(params, name + ".tp", te), batch);
  h = conv(params, name + ".c2", nn::silu(h), batch);
  return nn::add(x, h);
}

Eigen::MatrixXd stack_full(const std::vector<SceneTensor>& batch) {
  check(!batch.empty(), "lgm: empty batch");
  const int n = batch[0].n_max();
  const int cols = batch[0].cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(batch.size()) * n, cols);
  for (size_t e = 0; e < batch.size(); ++e) {
    check(batch[e].n_max() == n && batch[e].cols() == cols, "lgm: ragged batch");
    out.middleRows(static_cast<Eigen::Index>(e) * n, n) = batch[e].values;
  }
  return out;
}

}  // namespace

LgmModel init_lgm(const LdnConfig& config, const CategoryVocab& vocab,
                  const NormalizationStats& stats, const ddpm::NoiseSchedule& sched,
                  int n_max, std::uint64_t seed) {
  check(config.widths.size() == 3, "init_lgm: expects three channel widths");
  for (int w : config.widths) check(w > 0, "init_lgm: non-positive width");
  check(config.widths[0] % 2 == 0, "init_lgm: stem width must be even");
  check(config.heads > 0 && config.widths[2] % config.heads == 0,
        "init_lgm: heads must divide the bottleneck width");
  check(n_max > 0 && n_max % 4 == 0, "init_lgm: n_max must be divisible by 4");
  check(config.lambda_box >= 0.0, "init_lgm: negative lambda");
  check(config.w_schedule == "alpha_bar" || config.w_schedule == "one",
        "init_lgm: unknown w_schedule " + config.w_schedule);
  sched.validate();
  stats.validate();

  LgmModel model;
  model.config = config;
  model.sched = sched;
  model.stats = stats;
  model.vocab = vocab;
  model.n_max = n_max;

  Rng rng(Rng::mix(seed, 0x4c474d31u));
  const int w0 = config.widths[0], w1 = config.widths[1], w2 = config.widths[2];
  const int td = w0;
  const int k = vocab.onehot_width();

  make_linear(model.params, "ldn.stem", 8 + k, w0, rng);
  make_linear(model.params, "ldn.time.l1", td, td, rng);
  make_linear(model.params, "ldn.time.l2", td, td, rng);
  make_block(model.params, "ldn.enc0", w0, td, rng);
  make_linear(model.params, "ldn.down1", w0, w1, rng);
  make_block(model.params, "ldn.enc1", w1, td, rng);
  make_linear(model.params, "ldn.down2", w1, w2, rng);
  make_block(model.params, "ldn.bot1", w2, td, rng);
  make_layernorm(model.params, "ldn.attn.ln", w2);
  for (const char* p : {"ldn.attn.wq", "ldn.attn.wk", "ldn.attn.wv", "ldn.attn.wo"})
    model.params.create(p, w2, w2, 1.0 / std::sqrt(static_cast<double>(w2)), rng);
  make_block(model.params, "ldn.bot2", w2, td, rng);
  make_linear(model.params, "ldn.up1", w2 + w1, w1, rng);
  make_block(model.params, "ldn.dec1", w1, td, rng);
  make_linear(model.params, "ldn.up2", w1 + w0, w0, rng);
  make_block(model.params, "ldn.dec0", w0, td, rng);
  make_layernorm(model.params, "ldn.out.ln", w0);
  if (config.separate_heads) {
    model.params.create_fill("ldn.out.loc.w", w0, 3, 0.0);
    model.params.create_fill("ldn.out.loc.b", 1, 3, 0.0);
    model.params.create_fill("ldn.out.rot.w", w0, 2, 0.0);
    model.params.create_fill("ldn.out.rot.b", 1, 2, 0.0);
  } else {
    model.params.create_fill("ldn.out.lr.w", w0, 5, 0.0);
    model.params.create_fill("ldn.out.lr.b", 1, 5, 0.0);
  }
  return model;
}

double box_weight_at(const LdnConfig& config, const ddpm::NoiseSchedule& sched, int t) {
  if (config.w_schedule == "one") return 1.0;
  return sched.alpha_bar_at(t);
}

nn::Tensor ldn_forward(const LdnConfig& config, nn::ParamStore& params,
                       const Eigen::MatrixXd& x_full, const std::vector<int>& t, int batch) {
  check(batch > 0 && x_full.rows() % batch == 0, "ldn_forward: rows not divisible by batch");
  const int n = static_cast<int>(x_full.rows()) / batch;
  check(n % 4 == 0, "ldn_forward: rows per example must be divisible by 4");
  check(static_cast<int>(t.size()) == batch, "ldn_forward: t size mismatch");
  check(params.get("ldn.stem.w")->rows() == x_full.cols(),
        "ldn_forward: column count mismatch");

  const Tensor te = linear(params, "ldn.time.l2",
                           nn::silu(linear(params, "ldn.time.l1",
                                           nn::constant(time_embedding(t, config.widths[0])))));

  Tensor x0 = linear(params, "ldn.stem", nn::constant(x_full));
  x0 = block(params, "ldn.enc0", x0, te, batch);

  Tensor x1 = linear(params, "ldn.down1", nn::avgpool_rows2(x0, batch));
  x1 = block(params, "ldn.enc1", x1, te, batch);

  Tensor x2 = linear(params, "ldn.down2", nn::avgpool_rows2(x1, batch));
  x2 = block(params, "ldn.bot1", x2, te, batch);
  const Tensor a_in = ln(params, "ldn.attn.ln", x2);
  const Tensor sa = nn::attention(nn::matmul(a_in, params.get("ldn.attn.wq")),
                                  nn::matmul(a_in, params.get("ldn.attn.wk")),
                                  nn::matmul(a_in, params.get("ldn.attn.wv")), batch,
                                  config.heads);
  x2 = nn::add(x2, nn::matmul(sa, params.get("ldn.attn.wo")));
  x2 = block(params, "ldn.bot2", x2, te, batch);

  Tensor y1 = linear(params, "ldn.up1",
                     nn::concat_cols({nn::upsample_rows2(x2, batch), x1}));
  y1 = block(params, "ldn.dec1", y1, te, batch);

  Tensor y0 = linear(params, "ldn.up2",
                     nn::concat_cols({nn::upsample_rows2(y1, batch), x0}));
  y0 = block(params, "ldn.dec0", y0, te, batch);

  const Tensor h = ln(params, "ldn.out.ln", y0);
  if (config.separate_heads)
    return nn::concat_cols({linear(params, "ldn.out.loc", h), linear(params, "ldn.out.rot", h)});
  return linear(params, "ldn.out.lr", h);
}

nn::Tensor iou_penalty(const nn::Tensor& x0_lr, const std::vector<Eigen::Vector3d>& half_extents,
                       const std::vector<char>& active, const std::vector<double>& weight,
                       int batch, const NormalizationStats& stats, double sharpness) {
  const int rows = static_cast<int>(x0_lr->rows());
  check(x0_lr->cols() == 5, "iou_penalty: expects five columns");
  check(batch > 0 && rows % batch == 0, "iou_penalty: rows not divisible by batch");
  check(static_cast<int>(half_extents.size()) == rows &&
            static_cast<int>(active.size()) == rows &&
            static_cast<int>(weight.size()) == batch,
        "iou_penalty: side-data size mismatch");
  const int n = rows / batch;

  struct PairTerm {
    int a, b;
    double w;
    Eigen::Matrix<double, 10, 1> grad;
  };
  auto terms = std::make_shared<std::vector<PairTerm>>();
  double total = 0.0;
  for (int e = 0; e < batch; ++e) {
    for (int i = 0; i < n; ++i) {
      if (!active[e * n + i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[e * n + j]) continue;
        const int a = e * n + i, b = e * n + j;
        const PairOverlap po = smooth_pair_overlap(
            x0_lr->value.row(a).transpose(), x0_lr->value.row(b).transpose(), half_extents[a],
            half_extents[b], stats, sharpness);
        if (po.value == 0.0 && po.grad.isZero(0.0)) continue;
        total += weight[e] * po.value;
        terms->push_back({a, b, weight[e], po.grad});
      }
    }
  }

  Eigen::MatrixXd value(1, 1);
  value(0, 0) = total / batch;
  const double inv_batch = 1.0 / batch;
  return nn::make_op(value, {x0_lr}, [terms, inv_batch](nn::Node& node) {
    const double g = node.grad(0, 0);
    nn::Node& x = *node.parents[0];
    if (!x.requires_grad) return;
    x.ensure_grad();
    for (const PairTerm& term : *terms) {
      x.grad.row(term.a) += (g * term.w * inv_batch) * term.grad.head<5>().transpose();
      x.grad.row(term.b) += (g * term.w * inv_batch) * term.grad.tail<5>().transpose();
    }
  });
}

namespace {

// Shared corruption and bookkeeping for the loss paths.
struct LossSetup {
  Eigen::MatrixXd x_t;       // full columns, (l, r) corrupted
  Eigen::MatrixXd mask;      // (rows x 5) active-row indicator
  Eigen::MatrixXd coef_eps;  // sqrt(1 - abar_t) per row
  Eigen::MatrixXd coef_inv;  // 1 / sqrt(abar_t) per row
  std::vector<Eigen::Vector3d> halves;
  std::vector<char> active;
  std::vector<double> weights;
  int active_rows = 0;
  int lr0 = 0;
};

LossSetup prepare_loss(const std::vector<SceneTensor>& batch, const DiffusionDraw& draw,
                       const ddpm::NoiseSchedule& sched, const NormalizationStats& stats,
                       const std::string& w_schedule) {
  const int B = static_cast<int>(batch.size());
  check(static_cast<int>(draw.t.size()) == B, "lgm loss: draw batch mismatch");
  const int n = batch[0].n_max();

  LossSetup s;
  s.x_t = stack_full(batch);
  s.lr0 = batch[0].loc_begin();
  check(draw.noise.rows() == s.x_t.rows() && draw.noise.cols() == 5,
        "lgm loss: draw noise shape mismatch");

  s.mask.setZero(s.x_t.rows(), 5);
  s.coef_eps.resize(s.x_t.rows(), 5);
  s.coef_inv.resize(s.x_t.rows(), 5);
  s.halves.resize(s.x_t.rows());
  s.active.assign(s.x_t.rows(), 0);
  s.weights.resize(B);

  for (int e = 0; e < B; ++e) {
    const double ab = sched.alpha_bar_at(draw.t[e]);
    const double c_eps = std::sqrt(1.0 - ab);
    const double c_inv = 1.0 / std::sqrt(std::max(ab, 1e-12));
    s.weights[e] = w_schedule == "one" ? 1.0 : ab;
    for (int i = 0; i < n; ++i) {
      const int r = e * n + i;
      s.coef_eps.row(r).setConstant(c_eps);
      s.coef_inv.row(r).setConstant(c_inv);
      const Eigen::Vector3d size_norm = batch[e].values.row(i).head<3>().transpose();
      s.halves[r] = stats.denormalize_size(size_norm).cwiseMax(1e-4);
      if (batch[e].mask[i]) {
        s.active[r] = 1;
        s.mask.row(r).setOnes();
        ++s.active_rows;
      }
      s.x_t.block(r, s.lr0, 1, 5) = std::sqrt(ab) * s.x_t.block(r, s.lr0, 1, 5) +
                                    c_eps * draw.noise.row(r);
    }
  }
  return s;
}

}  // namespace

LgmLoss lgm_loss_draw(LgmModel& model, const std::vector<SceneTensor>& batch,
                      const DiffusionDraw& draw) {
  const int B = static_cast<int>(batch.size());
  LossSetup s = prepare_loss(batch, draw, model.sched, model.stats, model.config.w_schedule);
  check(s.active_rows > 0, "lgm_loss_draw: batch with no objects");

  const Tensor eps_hat = ldn_forward(model.config, model.params, s.x_t, draw.t, B);

  const Tensor err = nn::mul_const(nn::sub(eps_hat, nn::constant(draw.noise)), s.mask);
  const Tensor l_lr = nn::scale(nn::sum_all(nn::square(err)), 1.0 / (s.active_rows * 5.0));

  LgmLoss out;
  out.l_lr = l_lr->value(0, 0);
  if (model.config.lambda_box > 0.0) {
    const Eigen::MatrixXd xt_lr = s.x_t.middleCols(s.lr0, 5);
    const Tensor x0_hat = nn::mul_const(
        nn::sub(nn::constant(xt_lr), nn::mul_const(eps_hat, s.coef_eps)), s.coef_inv);
    const Tensor l_box = iou_penalty(x0_hat, s.halves, s.active, s.weights, B, model.stats,
                                     model.config.iou_sharpness);
    out.l_box = l_box->value(0, 0);
    out.total = nn::add(l_lr, nn::scale(l_box, model.config.lambda_box));
  } else {
    out.total = l_lr;
  }
  return out;
}

LgmLossValue lgm_loss(LgmModel& model, const std::vector<Room>& rooms, Rng& rng) {
  check(!rooms.empty(), "lgm_loss: empty batch");
  std::vector<SceneTensor> batch;
  for (const Room& room : rooms)
    batch.push_back(encode_scene(room, model.stats, model.vocab, model.n_max));
  const DiffusionDraw draw =
      make_draw(static_cast<int>(rooms.size()), model.n_max, 5, model.sched, 0.0, rng);
  nn::NoGradGuard guard;
  const LgmLoss loss = lgm_loss_draw(model, batch, draw);
  return {loss.total->value(0, 0), loss.l_lr, loss.l_box};
}

LgmLossValue lgm_loss_value(const std::vector<SceneTensor>& batch, const LrDenoiser& denoiser,
                            const ddpm::NoiseSchedule& sched, const DiffusionDraw& draw,
                            const NormalizationStats& stats, double lambda_box,
                            const std::string& w_schedule, double sharpness) {
  const int B = static_cast<int>(batch.size());
  LossSetup s = prepare_loss(batch, draw, sched, stats, w_schedule);
  check(s.active_rows > 0, "lgm_loss_value: batch with no objects");

  const Eigen::MatrixXd eps_hat = denoiser(s.x_t, draw.t);
  check(eps_hat.rows() == s.x_t.rows() && eps_hat.cols() == 5,
        "lgm_loss_value: denoiser shape mismatch");

  LgmLossValue out;
  out.l_lr = ((eps_hat - draw.noise).array() * s.mask.array()).square().sum() /
             (s.active_rows * 5.0);

  const Eigen::MatrixXd x0_hat =
      (s.x_t.middleCols(s.lr0, 5) - s.coef_eps.cwiseProduct(eps_hat)).cwiseProduct(s.coef_inv);
  const int n = static_cast<int>(s.x_t.rows()) / B;
  double total_box = 0.0;
  for (int e = 0; e < B; ++e)
    for (int i = 0; i < n; ++i) {
      if (!s.active[e * n + i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!s.active[e * n + j]) continue;
        const int a = e * n + i, b = e * n + j;
        total_box += s.weights[e] * smooth_pair_overlap(x0_hat.row(a).transpose(),
                                                        x0_hat.row(b).transpose(), s.halves[a],
                                                        s.halves[b], stats, sharpness)
                                        .value;
      }
    }
  out.l_box = total_box / B;
  out.total = out.l_lr + lambda_box * out.l_box;
  return out;
}

std::vector<std::vector<PlacedObject>> sample_layouts(
    LgmModel& model, const std::vector<std::vector<FurnitureItem>>& lists, Rng& rng) {
  check(!lists.empty(), "sample_layouts: no furniture lists");
  const int B = static_cast<int>(lists.size());
  const int n = model.n_max;
  const int k = model.vocab.onehot_width();
  const int cols = 8 + k;
  const int lr0 = 3 + k;

  Eigen::MatrixXd locked(B * n, cols);
  for (int e = 0; e < B; ++e) {
    check(static_cast<int>(lists[e].size()) <= n,
          "sample_layouts: furniture list exceeds capacity " + std::to_string(n));
    for (int i = 0; i < n; ++i) {
      Eigen::RowVectorXd row = SceneTensor::empty_row(k);
      if (i < static_cast<int>(lists[e].size())) {
        const FurnitureItem& item = lists[e][i];
        row.head<3>() = model.stats.normalize_size(item.half_size).transpose();
        row.segment(3, k).setConstant(-1.0);
        row(3 + model.vocab.id(item.category)) = 1.0;
      }
      locked.row(e * n + i) = row;
    }
  }

  ddpm::ColumnLock lock;
  lock.columns.assign(cols, true);
  for (int c = lr0; c < cols; ++c) lock.columns[c] = false;
  lock.values = locked;

  const ddpm::Denoiser denoiser = [&](const Eigen::MatrixXd& x_t, int t) {
    nn::NoGradGuard guard;
    const std::vector<int> ts(B, t);
    Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(x_t.rows(), x_t.cols());
    eps.middleCols(lr0, 5) = ldn_forward(model.config, model.params, x_t, ts, B)->value;
    return eps;
  };
  const Eigen::MatrixXd sampled = ddpm::sample_loop(denoiser, B * n, cols, model.sched, rng, lock);

  std::vector<std::vector<PlacedObject>> out(B);
  for (int e = 0; e < B; ++e) {
    SceneTensor tensor;
    tensor.k = k;
    tensor.values = sampled.middleRows(e * n, n);
    tensor.mask.assign(n, true);
    const Room room = decode_scene(tensor, model.stats, model.vocab);
    check(room.size() == static_cast<int>(lists[e].size()),
          "sample_layouts: decoded object count diverged from the locked list");
    for (const ObjectInstance& obj : room.objects) out[e].push_back({obj.location, obj.yaw});
  }
  return out;
}

std::vector<PlacedObject> sample_layout(LgmModel& model,
                                        const std::vector<FurnitureItem>& furniture, Rng& rng) {
  if (furniture.empty()) return {};
  return sample_layouts(model, {furniture}, rng)[0];
}

std::vector<TrainLogRow> train_lgm(LgmModel& model, const std::vector<Room>& rooms,
                                   const TrainConfig& config, Rng& rng) {
  check(!rooms.empty(), "train_lgm: empty corpus");
  check(config.steps > 0 && config.batch_size > 0 && config.lr > 0.0,
        "train_lgm: bad train config");

  std::vector<SceneTensor> encoded;
  encoded.reserve(rooms.size());
  for (const Room& room : rooms)
    encoded.push_back(encode_scene(room, model.stats, model.vocab, model.n_max));

  nn::Adam opt(config.lr);
  std::vector<TrainLogRow> log;
  log.reserve(config.steps);
  for (int step = 0; step < config.steps; ++step) {
    std::vector<SceneTensor> batch;
    for (int i = 0; i < config.batch_size; ++i)
      batch.push_back(encoded[rng.uniform_int(0, static_cast<std::int64_t>(rooms.size()) - 1)]);
    const DiffusionDraw draw =
        make_draw(config.batch_size, model.n_max, 5, model.sched, 0.0, rng);

    if (config.lr_halve_every > 0)
      opt.set_lr(config.lr * std::pow(0.5, step / config.lr_halve_every));
    model.params.zero_grad();
    const LgmLoss loss = lgm_loss_draw(model, batch, draw);
    nn::backward(loss.total);
    opt.step(model.params);
    ++model.step;
    log.push_back({model.step, loss.total->value(0, 0), opt.lr()});
  }
  return log;
}

void save_lgm(const LgmModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["kind"] = "lgm";
  j["version"] = kVersion;
  j["config"] = {{"widths", model.config.widths},
                 {"heads", model.config.heads},
                 {"separate_heads", model.config.separate_heads},
                 {"lambda_box", model.config.lambda_box},
                 {"w_schedule", model.config.w_schedule},
                 {"iou_sharpness", model.config.iou_sharpness}};
  j["schedule"] = schedule_to_json(model.sched);
  j["stats"] = stats_to_json(model.stats);
  j["vocab"] = model.vocab.names();
  j["n_max"] = model.n_max;
  j["step"] = model.step;
  j["params"] = params_to_json(model.params);
  save_cbor(j, path);
}

LgmModel load_lgm(const std::filesystem::path& path) {
  const nlohmann::json j = load_cbor(path);
  check(j.at("kind") == "lgm", "load_lgm: not a stage-two checkpoint");
  LdnConfig config;
  const nlohmann::json& jc = j.at("config");
  config.widths = jc.at("widths").get<std::vector<int>>();
  config.heads = jc.at("heads").get<int>();
  config.separate_heads = jc.at("separate_heads").get<bool>();
  config.lambda_box = jc.at("lambda_box").get<double>();
  config.w_schedule = jc.at("w_schedule").get<std::string>();
  config.iou_sharpness = jc.at("iou_sharpness").get<double>();

  LgmModel model =
      init_lgm(config, CategoryVocab(j.at("vocab").get<std::vector<std::string>>()),
               stats_from_json(j.at("stats")), schedule_from_json(j.at("schedule")),
               j.at("n_max").get<int>(), 0);
  model.step = j.at("step").get<long>();
  params_from_json(j.at("params"), model.params);
  return model;
}

}  // namespace lgm
}  // namespace scenediff
