#pragma once

#include <cmath>

namespace hsvm {

struct Vec3 {
  double e[3] = {0.0, 0.0, 0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double a, double b, double c) : e{a, b, c} {}

  constexpr double& operator[](int i) { return e[i]; }
  constexpr double operator[](int i) const { return e[i]; }

  constexpr Vec3& operator+=(const Vec3& o) {
    e[0] += o.e[0]; e[1] += o.e[1]; e[2] += o.e[2];
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    e[0] -= o.e[0]; e[1] -= o.e[1]; e[2] -= o.e[2];
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    e[0] *= s; e[1] *= s; e[2] *= s;
    return *this;
  }
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
constexpr bool operator==(const Vec3& a, const Vec3& b) {
  return a[0] == b[0] && a[1] == b[1] && a[2] == b[2];
}

constexpr double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double sup_norm(const Vec3& a) {
  return std::fmax(std::fabs(a[0]), std::fmax(std::fabs(a[1]), std::fabs(a[2])));
}

// mirror image across the wall x3 = 0
constexpr Vec3 reflect(const Vec3& a) { return {a[0], a[1], -a[2]}; }

// axis-aligned box
struct Box {
  Vec3 lo;
  Vec3 hi;

  bool empty() const { return lo[0] > hi[0] || lo[1] > hi[1] || lo[2] > hi[2]; }
  bool contains(const Vec3& p) const {
    return p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1] && p[2] >= lo[2] &&
           p[2] <= hi[2];
  }
  Box expanded(double d) const {
    return {lo - Vec3{d, d, d}, hi + Vec3{d, d, d}};
  }
  // squared distance from p to the box (0 inside)
  double dist2(const Vec3& p) const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = 0.0;
      if (p[i] < lo[i]) d = lo[i] - p[i];
      else if (p[i] > hi[i]) d = p[i] - hi[i];
      s += d * d;
    }
    return s;
  }
  static Box unite(const Box& a, const Box& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    Box r;
    for (int i = 0; i < 3; ++i) {
      r.lo[i] = std::fmin(a.lo[i], b.lo[i]);
      r.hi[i] = std::fmax(a.hi[i], b.hi[i]);
    }
    return r;
  }
  static Box none() { return {{1, 1, 1}, {-1, -1, -1}}; }
};

}  // namespace hsvm
