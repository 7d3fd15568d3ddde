#include "scenediff/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "scenediff/common.hpp"
#include "scenediff/dual.hpp"

namespace scenediff {

namespace {

constexpr double kClipEps = 1e-9;

template <typename S>
struct Pt2 {
  S x, y;
};

// Convex polygons with a small fixed capacity; a quad clipped by a quad has
// at most 8 vertices.
template <typename S>
struct ClipPoly {
  std::array<Pt2<S>, 16> pts;
  int n = 0;
  void push(const Pt2<S>& p) { pts[n++] = p; }
};

template <typename S>
S cross_from(const Pt2<S>& a, const Pt2<S>& b, const Pt2<S>& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

template <typename S>
Pt2<S> segment_line_intersect(const Pt2<S>& p, const Pt2<S>& q, const Pt2<S>& a,
                              const Pt2<S>& b) {
  // Line through a-b, segment p-q. Caller guarantees the segment crosses.
  const S num = cross_from(a, b, p);
  const S den = num - cross_from(a, b, q);
  const S t = num / den;
  return Pt2<S>{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

// Sutherland-Hodgman clip of a convex subject polygon against a convex
// counterclockwise clip polygon. Points within kClipEps of a clip edge count
// as inside, so shared or collinear edges resolve to inclusion.
template <typename S>
ClipPoly<S> clip_convex(const ClipPoly<S>& subject, const ClipPoly<S>& clip) {
  ClipPoly<S> out = subject;
  for (int e = 0; e < clip.n && out.n > 0; ++e) {
    const Pt2<S>& a = clip.pts[e];
    const Pt2<S>& b = clip.pts[(e + 1) % clip.n];
    ClipPoly<S> in = out;
    out.n = 0;
    for (int i = 0; i < in.n; ++i) {
      const Pt2<S>& cur = in.pts[i];
      const Pt2<S>& nxt = in.pts[(i + 1) % in.n];
      const bool cur_in = val(cross_from(a, b, cur)) >= -kClipEps;
      const bool nxt_in = val(cross_from(a, b, nxt)) >= -kClipEps;
      if (cur_in) {
        out.push(cur);
        if (!nxt_in) out.push(segment_line_intersect(cur, nxt, a, b));
      } else if (nxt_in) {
        out.push(segment_line_intersect(cur, nxt, a, b));
      }
    }
  }
  return out;
}

template <typename S>
S polygon_area(const ClipPoly<S>& poly) {
  S acc = S(0.0);
  for (int i = 0; i < poly.n; ++i) {
    const Pt2<S>& p = poly.pts[i];
    const Pt2<S>& q = poly.pts[(i + 1) % poly.n];
    acc = acc + (p.x * q.y - q.x * p.y);
  }
  return 0.5 * acc;
}

// Counterclockwise footprint corners from center, half-extents, and the yaw
// direction (sin, cos).
template <typename S>
ClipPoly<S> footprint_quad(const S& cx, const S& cy, double hx, double hy, const S& sn,
                           const S& cs) {
  static constexpr double ux[4] = {+1, -1, -1, +1};
  static constexpr double uy[4] = {+1, +1, -1, -1};
  ClipPoly<S> poly;
  for (int i = 0; i < 4; ++i) {
    const double lx = ux[i] * hx;
    const double ly = uy[i] * hy;
    poly.push(Pt2<S>{cx + cs * lx - sn * ly, cy + sn * lx + cs * ly});
  }
  return poly;
}

template <typename S>
S footprint_intersection_area(const ClipPoly<S>& a, const ClipPoly<S>& b) {
  const ClipPoly<S> inter = clip_convex(a, b);
  if (inter.n < 3) return S(0.0);
  const S area = polygon_area(inter);
  return val(area) > 0.0 ? area : S(0.0);
}

bool footprints_certainly_disjoint(const Eigen::Vector2d& ca, const Eigen::Vector2d& cb,
                                   const Eigen::Vector2d& ha, const Eigen::Vector2d& hb) {
  const double r = ha.norm() + hb.norm();
  return (ca - cb).squaredNorm() > r * r;
}

template <int N>
Dual<N> logsumexp2(const Dual<N>& a, const Dual<N>& b, double k) {
  // max(a, b) smoothed; stable for large |a - b|.
  const Dual<N>& m = a.v >= b.v ? a : b;
  const Dual<N>& o = a.v >= b.v ? b : a;
  return m + (1.0 / k) * log1p(exp(k * (o - m)));
}

template <int N>
Dual<N> softplus_scaled(const Dual<N>& x, double k) {
  // max(0, x) smoothed: softplus(k x) / k, stable in both tails.
  if (x.v > 0.0) return x + (1.0 / k) * log1p(exp(-k * x));
  return (1.0 / k) * log1p(exp(k * x));
}

}  // namespace

std::array<Eigen::Vector3d, 8> RotatedBox3D::corners() const {
  std::array<Eigen::Vector3d, 8> out;
  const auto quad = footprint();
  for (int i = 0; i < 4; ++i) {
    out[i] = Eigen::Vector3d(quad[i].x(), quad[i].y(), center.z() - half_extents.z());
    out[i + 4] = Eigen::Vector3d(quad[i].x(), quad[i].y(), center.z() + half_extents.z());
  }
  return out;
}

std::array<Eigen::Vector2d, 4> RotatedBox3D::footprint() const {
  const double sn = std::sin(yaw), cs = std::cos(yaw);
  const auto quad =
      footprint_quad<double>(center.x(), center.y(), half_extents.x(), half_extents.y(), sn, cs);
  std::array<Eigen::Vector2d, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = Eigen::Vector2d(quad.pts[i].x, quad.pts[i].y);
  return out;
}

double rotated_iou_3d(const RotatedBox3D& a_in, const RotatedBox3D& b_in) {
  check((a_in.half_extents.array() > 0.0).all() && (b_in.half_extents.array() > 0.0).all(),
        "rotated_iou_3d: zero-volume box");

  // Clipping one footprint against the other is not bitwise symmetric, so fix
  // the roles by ordering the operands first.
  auto key = [](const RotatedBox3D& box) {
    return std::array<double, 7>{box.center.x(),       box.center.y(),
                                 box.center.z(),       box.half_extents.x(),
                                 box.half_extents.y(), box.half_extents.z(),
                                 box.yaw};
  };
  const bool swap = key(b_in) < key(a_in);
  const RotatedBox3D& a = swap ? b_in : a_in;
  const RotatedBox3D& b = swap ? a_in : b_in;

  const double z_overlap = std::min(a.center.z() + a.half_extents.z(),
                                    b.center.z() + b.half_extents.z()) -
                           std::max(a.center.z() - a.half_extents.z(),
                                    b.center.z() - b.half_extents.z());
  if (z_overlap <= 0.0) return 0.0;
  if (footprints_certainly_disjoint(a.center.head<2>(), b.center.head<2>(),
                                    a.half_extents.head<2>(), b.half_extents.head<2>()))
    return 0.0;

  const double sa = std::sin(a.yaw), ca = std::cos(a.yaw);
  const double sb = std::sin(b.yaw), cb = std::cos(b.yaw);
  const auto quad_a = footprint_quad<double>(a.center.x(), a.center.y(), a.half_extents.x(),
                                             a.half_extents.y(), sa, ca);
  const auto quad_b = footprint_quad<double>(b.center.x(), b.center.y(), b.half_extents.x(),
                                             b.half_extents.y(), sb, cb);
  const double area = footprint_intersection_area(quad_a, quad_b);
  const double inter = area * z_overlap;
  const double uni = a.volume() + b.volume() - inter;
  return inter / uni;
}

double pairwise_scene_iou(const Room& room) {
  double total = 0.0;
  const int n = room.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      total += rotated_iou_3d(RotatedBox3D::of(room.objects[i]),
                              RotatedBox3D::of(room.objects[j]));
  return total;
}

double convex_polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  ClipPoly<double> p;
  for (const auto& v : poly) p.push(Pt2<double>{v.x(), v.y()});
  return polygon_area(p);
}

std::vector<Eigen::Vector2d> convex_clip(const std::vector<Eigen::Vector2d>& subject,
                                         const std::vector<Eigen::Vector2d>& clip) {
  ClipPoly<double> s, c;
  for (const auto& v : subject) s.push(Pt2<double>{v.x(), v.y()});
  for (const auto& v : clip) c.push(Pt2<double>{v.x(), v.y()});
  const auto out = clip_convex(s, c);
  std::vector<Eigen::Vector2d> result;
  result.reserve(out.n);
  for (int i = 0; i < out.n; ++i) result.emplace_back(out.pts[i].x, out.pts[i].y);
  return result;
}

PairOverlap smooth_pair_overlap(const Eigen::Matrix<double, 5, 1>& lr_a,
                                const Eigen::Matrix<double, 5, 1>& lr_b,
                                const Eigen::Vector3d& half_a, const Eigen::Vector3d& half_b,
                                const NormalizationStats& stats, double sharpness) {
  using D = Dual<10>;
  PairOverlap result;

  // Seed the ten inputs: [lx, ly, lz, sin, cos] per box, normalized units.
  std::array<D, 10> in;
  for (int i = 0; i < 5; ++i) {
    in[i] = D::seed(lr_a[i], i);
    in[5 + i] = D::seed(lr_b[i], 5 + i);
  }

  auto denorm = [&stats](const D& v, int axis) {
    const double lo = stats.loc_min[axis], hi = stats.loc_max[axis];
    return lo + 0.5 * (hi - lo) * (v + 1.0);
  };

  std::array<D, 3> ca{denorm(in[0], 0), denorm(in[1], 1), denorm(in[2], 2)};
  std::array<D, 3> cb{denorm(in[5], 0), denorm(in[6], 1), denorm(in[7], 2)};

  // Quick reject on the value part; a disjoint footprint has exactly zero
  // area (and zero gradient) so skipping is lossless.
  if (footprints_certainly_disjoint({ca[0].v, ca[1].v}, {cb[0].v, cb[1].v},
                                    half_a.head<2>(), half_b.head<2>()))
    return result;

  auto direction = [](const D& s, const D& c) {
    const D norm = sqrt(s * s + c * c + D(1e-12));
    return std::pair<D, D>{s / norm, c / norm};
  };
  const auto [sa, ca_rot] = direction(in[3], in[4]);
  const auto [sb, cb_rot] = direction(in[8], in[9]);

  const auto quad_a = footprint_quad<D>(ca[0], ca[1], half_a.x(), half_a.y(), sa, ca_rot);
  const auto quad_b = footprint_quad<D>(cb[0], cb[1], half_b.x(), half_b.y(), sb, cb_rot);
  const D area = footprint_intersection_area(quad_a, quad_b);
  if (val(area) <= 0.0) return result;

  // Smoothed vertical interval overlap.
  const D top = -logsumexp2(-(ca[2] + D(half_a.z())), -(cb[2] + D(half_b.z())), sharpness);
  const D bot = logsumexp2(ca[2] - D(half_a.z()), cb[2] - D(half_b.z()), sharpness);
  const D height = softplus_scaled(top - bot, sharpness);

  const D inter = area * height;
  const double va = 8.0 * half_a.prod(), vb = 8.0 * half_b.prod();
  const D iou = inter / (D(va + vb) - inter);

  result.value = iou.v;
  result.grad = iou.d;
  return result;
}

}  // namespace scenediff
