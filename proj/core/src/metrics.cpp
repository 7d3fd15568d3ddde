#include "scenediff/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "scenediff/common.hpp"
#include "scenediff/rng.hpp"

namespace scenediff {
namespace metrics {

namespace {

constexpr double kJitter = 1e-6;

std::map<std::string, long> category_histogram(const std::vector<Room>& rooms) {
  std::map<std::string, long> hist;
  for (const Room& room : rooms)
    for (const ObjectInstance& obj : room.objects) ++hist[obj.category];
  return hist;
}

// down x down x 3 average pool, scaled to [0, 1]
Eigen::VectorXd pooled_pixels(const TopDownMap& map, int down) {
  check(down > 0 && map.resolution % down == 0,
        "metrics: map resolution must be a multiple of the pooling size");
  const int block = map.resolution / down;
  Eigen::VectorXd out(static_cast<Eigen::Index>(down) * down * 3);
  const double norm = 1.0 / (255.0 * block * block);
  for (int by = 0; by < down; ++by)
    for (int bx = 0; bx < down; ++bx) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int y = by * block; y < (by + 1) * block; ++y)
        for (int x = bx * block; x < (bx + 1) * block; ++x) {
          const std::uint8_t* p = map.at(x, y);
          acc[0] += p[0];
          acc[1] += p[1];
          acc[2] += p[2];
        }
      for (int ch = 0; ch < 3; ++ch) out(3 * (by * down + bx) + ch) = acc[ch] * norm;
    }
  return out;
}

Eigen::MatrixXd extract_features(const std::vector<Room>& rooms,
                                 const FeatureExtractor& extractor,
                                 const RasterSettings& raster) {
  Eigen::MatrixXd features(rooms.size(), extractor.dim);
  for (size_t i = 0; i < rooms.size(); ++i) {
    const TopDownMap map = rasterize_topdown(rooms[i], raster.resolution, raster.extent);
    const Eigen::VectorXd f = extractor.fn(map);
    check(f.size() == extractor.dim, "metrics: extractor returned a wrong-sized feature");
    features.row(i) = f.transpose();
  }
  return features;
}

// symmetric PSD square root with negative eigenvalues clamped to zero
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  check(eig.info() == Eigen::Success, "metrics: eigendecomposition failed");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

// cubic polynomial kernel gram of row sets, k(x, y) = (x.y/d + 1)^3
Eigen::MatrixXd poly_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double d = static_cast<double>(a.cols());
  return ((a * b.transpose() / d).array() + 1.0).cube().matrix();
}

}  // namespace

double ckl(const std::vector<Room>& generated, const std::vector<Room>& reference) {
  check(!generated.empty() && !reference.empty(), "ckl: empty corpus");
  const auto gen_hist = category_histogram(generated);
  const auto ref_hist = category_histogram(reference);
  std::set<std::string> vocab;
  for (const auto& [name, count] : gen_hist) vocab.insert(name);
  for (const auto& [name, count] : ref_hist) vocab.insert(name);
  check(!vocab.empty(), "ckl: no objects on either side");

  auto total = [](const std::map<std::string, long>& hist) {
    long sum = 0;
    for (const auto& [name, count] : hist) sum += count;
    return static_cast<double>(sum);
  };
  const double v = static_cast<double>(vocab.size());
  const double n_gen = total(gen_hist), n_ref = total(ref_hist);
  double kl = 0.0;
  for (const std::string& name : vocab) {
    const auto gi = gen_hist.find(name);
    const auto ri = ref_hist.find(name);
    const double p = ((ri == ref_hist.end() ? 0.0 : ri->second) + 1.0) / (n_ref + v);
    const double q = ((gi == gen_hist.end() ? 0.0 : gi->second) + 1.0) / (n_gen + v);
    kl += p * std::log(p / q);
  }
  return kl;
}

FeatureExtractor random_projection_extractor(int out_dim, int down) {
  check(out_dim > 0 && down > 0, "random_projection_extractor: bad dimensions");
  const int in_dim = down * down * 3;
  // frozen seed: the extractor must be identical across runs and processes
  Rng rng(0x66656174u);
  auto projection = std::make_shared<Eigen::MatrixXd>(out_dim, in_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (int r = 0; r < out_dim; ++r)
    for (int c = 0; c < in_dim; ++c) (*projection)(r, c) = rng.normal(0.0, scale);

  FeatureExtractor extractor;
  extractor.name = "randproj-" + std::to_string(out_dim) + "x" + std::to_string(down);
  extractor.dim = out_dim;
  extractor.fn = [projection, down](const TopDownMap& map) {
    return Eigen::VectorXd(*projection * pooled_pixels(map, down));
  };
  return extractor;
}

FidKidResult fid_kid_features(const Eigen::MatrixXd& generated,
                              const Eigen::MatrixXd& reference) {
  check(generated.cols() == reference.cols(), "fid_kid: feature dims differ");
  check(generated.rows() >= 2 && reference.rows() >= 2, "fid_kid: need at least two rows");
  const auto fit = [](const Eigen::MatrixXd& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    return std::make_pair(mean, cov);
  };
  auto [mu1, sigma1] = fit(generated);
  auto [mu2, sigma2] = fit(reference);

  FidKidResult result;
  const auto min_eig = [](const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
  };
  if (min_eig(sigma1) < 1e-10 || min_eig(sigma2) < 1e-10) {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(sigma1.rows(), sigma1.cols());
    sigma1 += kJitter * eye;
    sigma2 += kJitter * eye;
    result.cov_jitter = true;
  }

  const Eigen::MatrixXd s1 = psd_sqrt(sigma1);
  const Eigen::MatrixXd cross = psd_sqrt(s1 * sigma2 * s1);
  result.fid = (mu1 - mu2).squaredNorm() + sigma1.trace() + sigma2.trace() - 2.0 * cross.trace();

  // unbiased MMD^2 with the cubic kernel
  const double n = static_cast<double>(generated.rows());
  const double m = static_cast<double>(reference.rows());
  const Eigen::MatrixXd kxx = poly_gram(generated, generated);
  const Eigen::MatrixXd kyy = poly_gram(reference, reference);
  const Eigen::MatrixXd kxy = poly_gram(generated, reference);
  result.kid = (kxx.sum() - kxx.trace()) / (n * (n - 1.0)) +
               (kyy.sum() - kyy.trace()) / (m * (m - 1.0)) - 2.0 * kxy.mean();
  return result;
}

double kid_direct(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& reference) {
  const double d = static_cast<double>(generated.cols());
  const auto kernel = [d](const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) {
    const double base = x.dot(y) / d + 1.0;
    return base * base * base;
  };
  const Eigen::Index n = generated.rows(), m = reference.rows();
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) xx += kernel(generated.row(i), generated.row(j));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j) yy += kernel(reference.row(i), reference.row(j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) xy += kernel(generated.row(i), reference.row(j));
  return xx / (static_cast<double>(n) * (n - 1)) + yy / (static_cast<double>(m) * (m - 1)) -
         2.0 * xy / (static_cast<double>(n) * m);
}

FidKidResult fid_kid(const std::vector<Room>& generated, const std::vector<Room>& reference,
                     const FeatureExtractor& extractor, const RasterSettings& raster) {
  check(generated.size() >= 100 && reference.size() >= 100,
        "fid_kid: need at least 100 scenes per side");
  return fid_kid_features(extract_features(generated, extractor, raster),
                          extract_features(reference, extractor, raster));
}

double sca(const std::vector<Room>& generated, const std::vector<Room>& reference,
           std::uint64_t seed, const RasterSettings& raster) {
  const size_t per_side = std::min(generated.size(), reference.size());
  check(per_side >= 100, "sca: need at least 100 scenes per side");

  const int down = raster.resolution >= 32 ? 16 : raster.resolution / 2;
  const int dim = down * down * 3;
  Rng rng(Rng::mix(seed, 0x73636121u));
  const auto side_features = [&](const std::vector<Room>& rooms) {
    std::vector<size_t> idx(rooms.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    for (size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.uniform_int(0, static_cast<std::int64_t>(i))]);
    Eigen::MatrixXd x(per_side, dim);
    for (size_t i = 0; i < per_side; ++i)
      x.row(i) =
          pooled_pixels(rasterize_topdown(rooms[idx[i]], raster.resolution, raster.extent), down)
              .transpose();
    return x;
  };
  const Eigen::MatrixXd gen_x = side_features(generated);
  const Eigen::MatrixXd ref_x = side_features(reference);

  const size_t train_n = (per_side * 4) / 5;
  const size_t test_n = per_side - train_n;
  const auto stack = [&](size_t begin, size_t count) {
    Eigen::MatrixXd x(2 * count, dim);
    Eigen::VectorXd y(2 * count);
    x.topRows(count) = gen_x.middleRows(begin, count);
    x.bottomRows(count) = ref_x.middleRows(begin, count);
    y.head(count).setOnes();
    y.tail(count).setZero();
    return std::make_pair(x, y);
  };
  auto [train_x, train_y] = stack(0, train_n);
  auto [test_x, test_y] = stack(train_n, test_n);

  // standardize on train statistics
  const Eigen::RowVectorXd mean = train_x.colwise().mean();
  Eigen::RowVectorXd sd =
      ((train_x.rowwise() - mean).array().square().colwise().mean()).sqrt();
  sd = sd.cwiseMax(1e-8);
  train_x = (train_x.rowwise() - mean).array().rowwise() / sd.array();
  test_x = (test_x.rowwise() - mean).array().rowwise() / sd.array();

  // ridge-regularized logistic regression, full-batch gradient descent
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double b = 0.0;
  const double lr = 0.5;
  const double l2 = 1e-2;
  const double inv_n = 1.0 / static_cast<double>(train_x.rows());
  for (int step = 0; step < 300; ++step) {
    const Eigen::VectorXd z = train_x * w + Eigen::VectorXd::Constant(train_x.rows(), b);
    const Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    const Eigen::VectorXd residual = p - train_y;
    w -= lr * (train_x.transpose() * residual * inv_n + l2 * w);
    b -= lr * residual.mean();
  }

  const Eigen::VectorXd z = test_x * w + Eigen::VectorXd::Constant(test_x.rows(), b);
  long correct = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    correct += ((z(i) > 0.0) == (test_y(i) > 0.5)) ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(z.size());
}

MetricReport evaluate_corpora(const std::vector<Room>& generated,
                              const std::vector<Room>& reference, std::uint64_t seed,
                              const RasterSettings& raster) {
  const FeatureExtractor extractor = random_projection_extractor();
  MetricReport report;
  report.n_generated = static_cast<long>(generated.size());
  report.n_reference = static_cast<long>(reference.size());
  report.extractor = extractor.name;
  report.seed = seed;
  report.ckl = ckl(generated, reference);
  const FidKidResult fk = fid_kid(generated, reference, extractor, raster);
  report.fid = fk.fid;
  report.kid = fk.kid;
  report.cov_jitter = fk.cov_jitter;
  report.sca = sca(generated, reference, seed, raster);
  return report;
}

std::string report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["fid"] = report.fid;
  j["kid"] = report.kid;
  j["kid_x1000"] = report.kid * 1000.0;
  j["sca"] = report.sca;
  j["ckl"] = report.ckl;
  j["ckl_x1000"] = report.ckl * 1000.0;
  j["n_generated"] = report.n_generated;
  j["n_reference"] = report.n_reference;
  j["extractor"] = report.extractor;
  j["seed"] = report.seed;
  j["cov_jitter"] = report.cov_jitter;
  j["note"] = "metrics computed on rasterized top-down maps; not comparable to "
              "pipelines using pretrained image backbones";
  return j.dump(2);
}

}  // namespace metrics
}  // namespace scenediff
