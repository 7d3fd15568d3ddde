#include "scenediff/flgm.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "scenediff/checkpoint.hpp"
#include "scenediff/common.hpp"
#include "scenediff/nn/adam.hpp"
#include "scenediff/scene_io.hpp"

namespace scenediff {
namespace flgm {

namespace {

using nn::Tensor;

// Weight plus bias pair with fan-in scaled init.
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

// Constant sinusoidal encoding of the row index within each example; only
// the positional-encoding ablation ever adds this.
Eigen::MatrixXd row_position_encoding(int batch, int rows, int dim) {
  std::vector<int> idx(rows);
  for (int i = 0; i < rows; ++i) idx[i] = i;
  const Eigen::MatrixXd one = time_embedding(idx, dim);
  Eigen::MatrixXd out(batch * rows, dim);
  for (int e = 0; e < batch; ++e) out.middleRows(e * rows, rows) = one;
  return out;
}

std::vector<std::vector<int>> prompt_ids(const TextVocab& vocab,
                                         const std::vector<std::string>& prompts,
                                         const std::vector<char>& uncond) {
  std::vector<std::vector<int>> ids(prompts.size());
  for (size_t e = 0; e < prompts.size(); ++e)
    ids[e] = uncond[e] ? std::vector<int>{vocab.null_id()} : vocab.encode(prompts[e]);
  return ids;
}

Eigen::MatrixXd stack_sc(const std::vector<SceneTensor>& batch) {
  check(!batch.empty(), "flgm: empty batch");
  const int n = batch[0].n_max();
  const int sc = batch[0].sc_cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(batch.size()) * n, sc);
  for (size_t e = 0; e < batch.size(); ++e) {
    check(batch[e].n_max() == n && batch[e].sc_cols() == sc, "flgm: ragged batch");
    out.middleRows(static_cast<Eigen::Index>(e) * n, n) = batch[e].values.leftCols(sc);
  }
  return out;
}

Eigen::MatrixXd corrupt(const Eigen::MatrixXd& x0, const DiffusionDraw& draw,
                        const ddpm::NoiseSchedule& sched, int batch) {
  const int rows = static_cast<int>(x0.rows()) / batch;
  Eigen::MatrixXd x_t(x0.rows(), x0.cols());
  for (int e = 0; e < batch; ++e) {
    const double ab = sched.alpha_bar_at(draw.t[e]);
    x_t.middleRows(e * rows, rows) = std::sqrt(ab) * x0.middleRows(e * rows, rows) +
                                     std::sqrt(1.0 - ab) * draw.noise.middleRows(e * rows, rows);
  }
  return x_t;
}

}  // namespace

TextBatch TextBatch::make(const std::vector<std::vector<int>>& per_example, int null_id) {
  check(!per_example.empty(), "TextBatch: empty batch");
  TextBatch tb;
  tb.batch = static_cast<int>(per_example.size());
  size_t longest = 1;
  for (const auto& ids : per_example) {
    check(!ids.empty(), "TextBatch: example with no tokens");
    longest = std::max(longest, ids.size());
  }
  tb.tokens_per_example = static_cast<int>(longest);
  tb.ids.assign(per_example.size() * longest, null_id);
  tb.valid.assign(per_example.size() * longest, 0);
  for (size_t e = 0; e < per_example.size(); ++e)
    for (size_t i = 0; i < per_example[e].size(); ++i) {
      tb.ids[e * longest + i] = per_example[e][i];
      tb.valid[e * longest + i] = 1;
    }
  return tb;
}

FlgmModel init_flgm(const FdnConfig& config, const CategoryVocab& vocab,
                    const TextVocab& text_vocab, const NormalizationStats& stats,
                    const ddpm::NoiseSchedule& sched, int n_max, std::uint64_t seed) {
  check(config.width > 0 && config.width % 2 == 0, "init_flgm: width must be even");
  check(config.heads > 0 && config.width % config.heads == 0,
        "init_flgm: heads must divide width");
  check(config.depth > 0 && config.input_hidden > 0 && config.ffn_mult > 0,
        "init_flgm: non-positive dimension");
  check(n_max > 0, "init_flgm: n_max must be positive");
  sched.validate();
  stats.validate();

  FlgmModel model;
  model.config = config;
  model.sched = sched;
  model.stats = stats;
  model.vocab = vocab;
  model.text_vocab = text_vocab;
  model.n_max = n_max;

  Rng rng(Rng::mix(seed, 0x464c474du));  // init stream
  const int C = config.width;
  const int h = config.input_hidden;
  const int k = vocab.onehot_width();

  model.params.create("text.embed", text_vocab.size(), C, 0.02, rng);
  make_linear(model.params, "fdn.in_s.l1", 3, h, rng);
  make_linear(model.params, "fdn.in_s.l2", h, C, rng);
  make_linear(model.params, "fdn.in_c.l1", k, h, rng);
  make_linear(model.params, "fdn.in_c.l2", h, C, rng);
  make_linear(model.params, "fdn.time.l1", C, C, rng);
  make_linear(model.params, "fdn.time.l2", C, C, rng);
  for (int i = 0; i < config.depth; ++i) {
    const std::string b = "fdn.b" + std::to_string(i);
    make_layernorm(model.params, b + ".ln1", C);
    for (const char* p : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"})
      model.params.create(b + p, C, C, 1.0 / std::sqrt(static_cast<double>(C)), rng);
    if (config.cross_attention) {
      make_layernorm(model.params, b + ".ln2", C);
      for (const char* p : {".xattn.wq", ".xattn.wk", ".xattn.wv", ".xattn.wo"})
        model.params.create(b + p, C, C, 1.0 / std::sqrt(static_cast<double>(C)), rng);
    }
    make_layernorm(model.params, b + ".ln3", C);
    make_linear(model.params, b + ".ffn.l1", C, C * config.ffn_mult, rng);
    make_linear(model.params, b + ".ffn.l2", C * config.ffn_mult, C, rng);
  }
  make_layernorm(model.params, "fdn.out.ln", C);
  // Zero-init head so the untrained model predicts zero noise.
  model.params.create_fill("fdn.out.w", C, 3 + k, 0.0);
  model.params.create_fill("fdn.out.b", 1, 3 + k, 0.0);
  return model;
}

nn::Tensor fdn_forward(const FdnConfig& config, nn::ParamStore& params,
                       const Eigen::MatrixXd& sc_t, const std::vector<int>& t,
                       const TextBatch& text, int batch) {
  check(batch > 0 && sc_t.rows() % batch == 0, "fdn_forward: rows not divisible by batch");
  check(static_cast<int>(t.size()) == batch, "fdn_forward: t size mismatch");
  check(text.batch == batch, "fdn_forward: text batch mismatch");
  const int k = static_cast<int>(sc_t.cols()) - 3;
  check(k >= 2 && params.get("fdn.in_c.l1.w")->rows() == k,
        "fdn_forward: category width mismatch");
  const int rows = static_cast<int>(sc_t.rows()) / batch;
  const int C = config.width;

  const Tensor input = nn::constant(sc_t);
  const Tensor xs = linear(params, "fdn.in_s.l2",
                           nn::silu(linear(params, "fdn.in_s.l1", nn::slice_cols(input, 0, 3))));
  const Tensor xc = linear(params, "fdn.in_c.l2",
                           nn::silu(linear(params, "fdn.in_c.l1", nn::slice_cols(input, 3, k))));
  Tensor x = nn::add(xs, xc);

  const Tensor te = linear(params, "fdn.time.l2",
                           nn::silu(linear(params, "fdn.time.l1",
                                           nn::constant(time_embedding(t, C)))));
  x = nn::add_per_example(x, te, batch);
  if (config.positional_encoding)
    x = nn::add_constmat(x, row_position_encoding(batch, rows, C));

  const Tensor emb = nn::gather_rows(params.get("text.embed"), text.ids);

  for (int i = 0; i < config.depth; ++i) {
    const std::string b = "fdn.b" + std::to_string(i);
    const Tensor h1 = ln(params, b + ".ln1", x);
    const Tensor sa = nn::attention(nn::matmul(h1, params.get(b + ".attn.wq")),
                                    nn::matmul(h1, params.get(b + ".attn.wk")),
                                    nn::matmul(h1, params.get(b + ".attn.wv")), batch,
                                    config.heads);
    x = nn::add(x, nn::matmul(sa, params.get(b + ".attn.wo")));
    if (config.cross_attention) {
      const Tensor h2 = ln(params, b + ".ln2", x);
      const Tensor ca = nn::attention(nn::matmul(h2, params.get(b + ".xattn.wq")),
                                      nn::matmul(emb, params.get(b + ".xattn.wk")),
                                      nn::matmul(emb, params.get(b + ".xattn.wv")), batch,
                                      config.heads, &text.valid);
      x = nn::add(x, nn::matmul(ca, params.get(b + ".xattn.wo")));
    }
    const Tensor h3 = ln(params, b + ".ln3", x);
    x = nn::add(x, linear(params, b + ".ffn.l2",
                          nn::silu(linear(params, b + ".ffn.l1", h3))));
  }
  return nn::affine(ln(params, "fdn.out.ln", x), params.get("fdn.out.w"),
                    params.get("fdn.out.b"));
}

nn::Tensor flgm_loss_draw(FlgmModel& model, const std::vector<SceneTensor>& batch,
                          const std::vector<std::string>& prompts, const DiffusionDraw& draw) {
  const int B = static_cast<int>(batch.size());
  check(static_cast<int>(prompts.size()) == B, "flgm_loss_draw: prompt count mismatch");
  check(static_cast<int>(draw.t.size()) == B, "flgm_loss_draw: draw batch mismatch");

  const Eigen::MatrixXd sc0 = stack_sc(batch);
  check(draw.noise.rows() == sc0.rows() && draw.noise.cols() == sc0.cols(),
        "flgm_loss_draw: draw noise shape mismatch");
  const Eigen::MatrixXd sc_t = corrupt(sc0, draw, model.sched, B);

  const TextBatch text = TextBatch::make(prompt_ids(model.text_vocab, prompts, draw.uncond),
                                         model.text_vocab.null_id());
  const Tensor eps_hat = fdn_forward(model.config, model.params, sc_t, draw.t, text, B);
  return nn::mean_all(nn::square(nn::sub(eps_hat, nn::constant(draw.noise))));
}

double flgm_loss(FlgmModel& model, const std::vector<Room>& rooms, Rng& rng, double p_uncond) {
  check(!rooms.empty(), "flgm_loss: empty batch");
  std::vector<SceneTensor> batch;
  std::vector<std::string> prompts;
  for (const Room& room : rooms) {
    batch.push_back(encode_scene(room, model.stats, model.vocab, model.n_max));
    prompts.push_back(prompt_for_room(room));
  }
  const DiffusionDraw draw = make_draw(static_cast<int>(rooms.size()), model.n_max,
                                       batch[0].sc_cols(), model.sched, p_uncond, rng);
  nn::NoGradGuard guard;
  return flgm_loss_draw(model, batch, prompts, draw)->value(0, 0);
}

double flgm_loss_value(const std::vector<SceneTensor>& batch, const ScDenoiser& denoiser,
                       const ddpm::NoiseSchedule& sched, const DiffusionDraw& draw) {
  const int B = static_cast<int>(batch.size());
  const Eigen::MatrixXd sc0 = stack_sc(batch);
  const Eigen::MatrixXd sc_t = corrupt(sc0, draw, sched, B);
  const Eigen::MatrixXd eps_hat = denoiser(sc_t, draw.t);
  check(eps_hat.rows() == sc0.rows() && eps_hat.cols() == sc0.cols(),
        "flgm_loss_value: denoiser shape mismatch");
  return (eps_hat - draw.noise).array().square().mean();
}

std::vector<std::vector<FurnitureItem>> sample_furniture_lists(
    FlgmModel& model, const std::vector<std::string>& prompts, Rng& rng) {
  check(!prompts.empty(), "sample_furniture_lists: no prompts");
  const int B = static_cast<int>(prompts.size());
  const int n = model.n_max;
  const int sc = 3 + model.vocab.onehot_width();

  std::vector<std::vector<int>> ids(B);
  for (int e = 0; e < B; ++e) ids[e] = model.text_vocab.encode(prompts[e]);
  const TextBatch text = TextBatch::make(ids, model.text_vocab.null_id());

  const ddpm::Denoiser denoiser = [&](const Eigen::MatrixXd& x_t, int t) {
    nn::NoGradGuard guard;
    const std::vector<int> ts(B, t);
    return fdn_forward(model.config, model.params, x_t, ts, text, B)->value;
  };
  const Eigen::MatrixXd sampled = ddpm::sample_loop(denoiser, B * n, sc, model.sched, rng);

  // Decode through the scene tensor path with neutral layout columns.
  std::vector<std::vector<FurnitureItem>> lists(B);
  const int k = model.vocab.onehot_width();
  for (int e = 0; e < B; ++e) {
    SceneTensor tensor;
    tensor.k = k;
    tensor.values.resize(n, 8 + k);
    tensor.values.setZero();
    tensor.values.leftCols(sc) = sampled.middleRows(e * n, n);
    tensor.values.col(tensor.rot_begin() + 1).setConstant(1.0);
    tensor.mask.assign(n, true);
    const Room room = decode_scene(tensor, model.stats, model.vocab);
    for (const ObjectInstance& obj : room.objects)
      lists[e].push_back({obj.category, obj.half_size});
  }
  return lists;
}

std::vector<FurnitureItem> sample_furniture_list(FlgmModel& model, const std::string& prompt,
                                                 Rng& rng) {
  return sample_furniture_lists(model, {prompt}, rng)[0];
}

std::vector<TrainLogRow> train_flgm(FlgmModel& model, const std::vector<Room>& rooms,
                                    const TrainConfig& config, Rng& rng) {
  check(!rooms.empty(), "train_flgm: empty corpus");
  check(config.steps > 0 && config.batch_size > 0 && config.lr > 0.0,
        "train_flgm: bad train config");

  std::vector<SceneTensor> encoded;
  std::vector<std::string> prompts;
  encoded.reserve(rooms.size());
  for (const Room& room : rooms) {
    encoded.push_back(encode_scene(room, model.stats, model.vocab, model.n_max));
    prompts.push_back(prompt_for_room(room));
  }
  const int sc = encoded[0].sc_cols();

  nn::Adam opt(config.lr);
  std::vector<TrainLogRow> log;
  log.reserve(config.steps);
  for (int step = 0; step < config.steps; ++step) {
    std::vector<SceneTensor> batch;
    std::vector<std::string> batch_prompts;
    for (int i = 0; i < config.batch_size; ++i) {
      const auto idx = rng.uniform_int(0, static_cast<std::int64_t>(rooms.size()) - 1);
      batch.push_back(encoded[idx]);
      batch_prompts.push_back(prompts[idx]);
    }
    const DiffusionDraw draw =
        make_draw(config.batch_size, model.n_max, sc, model.sched, config.p_uncond, rng);

    if (config.lr_halve_every > 0)
      opt.set_lr(config.lr * std::pow(0.5, step / config.lr_halve_every));
    model.params.zero_grad();
    const Tensor loss = flgm_loss_draw(model, batch, batch_prompts, draw);
    nn::backward(loss);
    opt.step(model.params);
    ++model.step;
    log.push_back({model.step, loss->value(0, 0), opt.lr()});
  }
  return log;
}

void save_flgm(const FlgmModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["kind"] = "flgm";
  j["version"] = kVersion;
  j["config"] = {{"width", model.config.width},
                 {"depth", model.config.depth},
                 {"heads", model.config.heads},
                 {"ffn_mult", model.config.ffn_mult},
                 {"input_hidden", model.config.input_hidden},
                 {"positional_encoding", model.config.positional_encoding},
                 {"cross_attention", model.config.cross_attention}};
  j["schedule"] = schedule_to_json(model.sched);
  j["stats"] = stats_to_json(model.stats);
  j["vocab"] = model.vocab.names();
  j["text_vocab"] = model.text_vocab.tokens();
  j["n_max"] = model.n_max;
  j["step"] = model.step;
  j["params"] = params_to_json(model.params);
  save_cbor(j, path);
}

FlgmModel load_flgm(const std::filesystem::path& path) {
  const nlohmann::json j = load_cbor(path);
  check(j.at("kind") == "flgm", "load_flgm: not a stage-one checkpoint");
  FdnConfig config;
  const nlohmann::json& jc = j.at("config");
  config.width = jc.at("width").get<int>();
  config.depth = jc.at("depth").get<int>();
  config.heads = jc.at("heads").get<int>();
  config.ffn_mult = jc.at("ffn_mult").get<int>();
  config.input_hidden = jc.at("input_hidden").get<int>();
  config.positional_encoding = jc.at("positional_encoding").get<bool>();
  config.cross_attention = jc.at("cross_attention").get<bool>();

  FlgmModel model = init_flgm(
      config, CategoryVocab(j.at("vocab").get<std::vector<std::string>>()),
      TextVocab::from_tokens(j.at("text_vocab").get<std::vector<std::string>>()),
      stats_from_json(j.at("stats")), schedule_from_json(j.at("schedule")),
      j.at("n_max").get<int>(), 0);
  model.step = j.at("step").get<long>();
  params_from_json(j.at("params"), model.params);
  return model;
}

}  // namespace flgm
}  // namespace scenediff
