#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsslab {

using Vec3 = std::array<double, 3>;
// Row-major: m[i][j] = d v_i / d y_j for gradients.
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
  a[0] += b[0];
  a[1] += b[1];
  a[2] += b[2];
  return a;
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Mat3 zero_mat() { return Mat3{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }
inline double trace(const Mat3& m) { return m[0][0] + m[1][1] + m[2][2]; }

// Thrown for invalid arguments and out-of-domain evaluations.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Second-order forward jet: value, first and second derivative in one variable.
struct Jet2 {
  double v = 0, d = 0, dd = 0;
  Jet2() = default;
  Jet2(double value) : v(value) {}
  Jet2(double value, double d1, double d2) : v(value), d(d1), dd(d2) {}
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.d, -a.dd}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2 * a.d * b.d + a.v * b.dd};
}
inline Jet2 operator*(double s, const Jet2& a) { return {s * a.v, s * a.d, s * a.dd}; }
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double q = a.v / b.v;
  const double qd = (a.d - q * b.d) / b.v;
  const double qdd = (a.dd - 2 * qd * b.d - q * b.dd) / b.v;
  return {q, qd, qdd};
}
inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d, e * (a.dd + a.d * a.d)};
}
// Compose a scalar function with known derivatives f, f', f'' at a.v.
inline Jet2 compose(const Jet2& a, double f, double f1, double f2) {
  return {f, f1 * a.d, f2 * a.d * a.d + f1 * a.dd};
}

}  // namespace dsslab
