#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scenediff/raster.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {
namespace metrics {

// Category KL divergence KL(reference || generated) over per-category
// object frequencies, add-one smoothed on the union vocabulary. Reported
// x0.001 at the surface, stored raw.
double ckl(const std::vector<Room>& generated, const std::vector<Room>& reference);

struct FeatureExtractor {
  std::string name;
  int dim = 0;
  std::function<Eigen::VectorXd(const TopDownMap&)> fn;
};

// Default feature stage: average-pool the map to down x down, then project
// with a frozen seeded Gaussian matrix. Self-consistent across runs, not
// comparable with pretrained-backbone numbers.
FeatureExtractor random_projection_extractor(int out_dim = 64, int down = 16);

struct RasterSettings {
  int resolution = 32;
  double extent = 4.0;
};

struct FidKidResult {
  double fid = 0.0;
  double kid = 0.0;  // raw unbiased MMD^2, display convention x0.001
  bool cov_jitter = false;
};

// FID between Gaussian feature fits, KID as the unbiased cubic-polynomial
// MMD^2 over the same features. Near-singular covariances get a 1e-6
// diagonal jitter, flagged in the result.
FidKidResult fid_kid(const std::vector<Room>& generated, const std::vector<Room>& reference,
                     const FeatureExtractor& extractor, const RasterSettings& raster = {});

// Same estimators on precomputed feature rows, for oracles.
FidKidResult fid_kid_features(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& reference);

// Reference O(n^2) loop evaluation of the unbiased MMD^2 estimator.
double kid_direct(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& reference);

// Held-out accuracy x100 of a small logistic classifier told to separate
// generated from reference maps; 50 means indistinguishable. Balanced
// sides, 80/20 split, deterministic per seed. Needs >= 100 scenes per side.
double sca(const std::vector<Room>& generated, const std::vector<Room>& reference,
           std::uint64_t seed, const RasterSettings& raster = {});

struct MetricReport {
  double fid = 0.0;
  double kid = 0.0;
  double sca = 0.0;
  double ckl = 0.0;
  long n_generated = 0;
  long n_reference = 0;
  std::string extractor;
  std::uint64_t seed = 0;
  bool cov_jitter = false;
};

MetricReport evaluate_corpora(const std::vector<Room>& generated,
                              const std::vector<Room>& reference, std::uint64_t seed,
                              const RasterSettings& raster = {});

// JSON with raw values plus the x0.001 display fields for kid and ckl.
std::string report_to_json(const MetricReport& report);

}  // namespace metrics
}  // namespace scenediff
