#pragma once

#include <Eigen/Core>
#include <cmath>

namespace scenediff {

// Forward-mode dual number with N partial derivatives. Used to differentiate
// the box-overlap surrogate with respect to the handful of scalars each box
// pair depends on; branch decisions are taken on the value part, which picks
// a subgradient at piecewise boundaries.
template <int N>
struct Dual {
  double v = 0.0;
  Eigen::Matrix<double, N, 1> d = Eigen::Matrix<double, N, 1>::Zero();

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constants are convenient
  static Dual seed(double value, int slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }
};

template <int N>
inline double val(const Dual<N>& x) {
  return x.v;
}
inline double val(double x) { return x; }

template <int N>
Dual<N> operator+(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v + b.v);
  r.d = a.d + b.d;
  return r;
}
template <int N>
Dual<N> operator-(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v - b.v);
  r.d = a.d - b.d;
  return r;
}
template <int N>
Dual<N> operator-(const Dual<N>& a) {
  Dual<N> r(-a.v);
  r.d = -a.d;
  return r;
}
template <int N>
Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v * b.v);
  r.d = a.d * b.v + b.d * a.v;
  return r;
}
template <int N>
Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v / b.v);
  r.d = (a.d * b.v - b.d * a.v) / (b.v * b.v);
  return r;
}
template <int N>
Dual<N> operator*(double s, const Dual<N>& a) {
  Dual<N> r(s * a.v);
  r.d = s * a.d;
  return r;
}
template <int N>
Dual<N> operator+(double s, const Dual<N>& a) {
  Dual<N> r(s + a.v);
  r.d = a.d;
  return r;
}
template <int N>
Dual<N> operator-(double s, const Dual<N>& a) {
  Dual<N> r(s - a.v);
  r.d = -a.d;
  return r;
}
template <int N>
Dual<N> operator*(const Dual<N>& a, double s) {
  return s * a;
}
template <int N>
Dual<N> operator+(const Dual<N>& a, double s) {
  return s + a;
}
template <int N>
Dual<N> operator-(const Dual<N>& a, double s) {
  return a + (-s);
}
template <int N>
Dual<N> operator/(const Dual<N>& a, double s) {
  return (1.0 / s) * a;
}
template <int N>
Dual<N> operator/(double s, const Dual<N>& a) {
  Dual<N> r(s / a.v);
  r.d = -(s / (a.v * a.v)) * a.d;
  return r;
}

template <int N>
Dual<N> sqrt(const Dual<N>& a) {
  const double s = std::sqrt(a.v);
  Dual<N> r(s);
  r.d = a.d / (2.0 * s);
  return r;
}
template <int N>
Dual<N> exp(const Dual<N>& a) {
  const double e = std::exp(a.v);
  Dual<N> r(e);
  r.d = a.d * e;
  return r;
}
template <int N>
Dual<N> log(const Dual<N>& a) {
  Dual<N> r(std::log(a.v));
  r.d = a.d / a.v;
  return r;
}
template <int N>
Dual<N> log1p(const Dual<N>& a) {
  Dual<N> r(std::log1p(a.v));
  r.d = a.d / (1.0 + a.v);
  return r;
}

using std::exp;
using std::log;
using std::log1p;
using std::sqrt;

}  // namespace scenediff
