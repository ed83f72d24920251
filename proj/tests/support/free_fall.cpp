#include "free_fall.hpp"

#include <cmath>

namespace oracle {

void free_fall(const Vec3& x, const Vec3& v, double g, double tau, Vec3& X, Vec3& V) {
  V = v;
  V[2] = v[2] - g * tau;
  const double j0 = std::sqrt(1.0 + hsvm::norm2(v));
  const double j1 = std::sqrt(1.0 + hsvm::norm2(V));
  if (std::fabs(g) < 1e-9) {
    X = x + (tau / j0) * v;
    return;
  }
  const double a = std::sqrt(1.0 + v[0] * v[0] + v[1] * v[1]);
  const double s = (std::asinh(v[2] / a) - std::asinh(V[2] / a)) / g;
  X = {x[0] + v[0] * s, x[1] + v[1] * s, x[2] + (j0 - j1) / g};
}

double FreeFallDensity::value(double t, const Vec3& x, const Vec3& v) const {
  Vec3 X, V;
  free_fall(x, v, g_, -t, X, V);
  // height is concave in time under downward force, so the endpoint check suffices
  if (X[2] < 0.0) return 0.0;
  return f0_->value(X, V);
}

hsvm::Box FreeFallDensity::support(double t) const {
  hsvm::Box b = f0_->support();
  if (b.empty()) return b;
  b = b.expanded(t);
  b.lo[2] = std::fmax(b.lo[2], 0.0);
  return b;
}

}  // namespace oracle
