#include "scenediff/normalization.hpp"

#include <limits>

#include "scenediff/common.hpp"

namespace scenediff {

namespace {

Eigen::Vector3d to_unit(const Eigen::Vector3d& v, const Eigen::Vector3d& lo,
                        const Eigen::Vector3d& hi) {
  return (2.0 * (v - lo).array() / (hi - lo).array() - 1.0).matrix();
}

Eigen::Vector3d from_unit(const Eigen::Vector3d& v, const Eigen::Vector3d& lo,
                          const Eigen::Vector3d& hi) {
  return (lo.array() + (v.array() + 1.0) * 0.5 * (hi - lo).array()).matrix();
}

void widen_degenerate(Eigen::Vector3d& lo, Eigen::Vector3d& hi, double min_span) {
  for (int a = 0; a < 3; ++a) {
    if (hi[a] - lo[a] < min_span) {
      const double mid = 0.5 * (hi[a] + lo[a]);
      lo[a] = mid - 0.5 * min_span;
      hi[a] = mid + 0.5 * min_span;
    }
  }
}

}  // namespace

NormalizationStats NormalizationStats::fit(std::span<const Room> rooms, double min_span) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  NormalizationStats s;
  s.size_min.setConstant(inf);
  s.size_max.setConstant(-inf);
  s.loc_min.setConstant(inf);
  s.loc_max.setConstant(-inf);
  long count = 0;
  for (const Room& room : rooms) {
    for (const ObjectInstance& obj : room.objects) {
      s.size_min = s.size_min.cwiseMin(obj.half_size);
      s.size_max = s.size_max.cwiseMax(obj.half_size);
      s.loc_min = s.loc_min.cwiseMin(obj.location);
      s.loc_max = s.loc_max.cwiseMax(obj.location);
      ++count;
    }
  }
  check(count > 0, "normalization stats: corpus has no objects");
  widen_degenerate(s.size_min, s.size_max, min_span);
  widen_degenerate(s.loc_min, s.loc_max, min_span);
  s.validate();
  return s;
}

Eigen::Vector3d NormalizationStats::normalize_size(const Eigen::Vector3d& v) const {
  return to_unit(v, size_min, size_max);
}

Eigen::Vector3d NormalizationStats::denormalize_size(const Eigen::Vector3d& v) const {
  return from_unit(v, size_min, size_max);
}

Eigen::Vector3d NormalizationStats::normalize_location(const Eigen::Vector3d& v) const {
  return to_unit(v, loc_min, loc_max);
}

Eigen::Vector3d NormalizationStats::denormalize_location(const Eigen::Vector3d& v) const {
  return from_unit(v, loc_min, loc_max);
}

void NormalizationStats::validate() const {
  check((size_min.array() < size_max.array()).all(), "normalization stats: size min >= max");
  check((loc_min.array() < loc_max.array()).all(), "normalization stats: location min >= max");
}

}  // namespace scenediff
