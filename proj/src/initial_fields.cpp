#include "hsvm/initial_fields.hpp"

#include <cmath>
#include <numbers>

#include "hsvm/moments.hpp"

namespace hsvm {

void InitialFieldData::gradient(const Vec3& x, double dE[3][3], double dB[3][3]) const {
  const double h = 1e-5;
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const FieldSample a = at(xp), b = at(xm);
    for (int i = 0; i < 3; ++i) {
      dE[i][j] = (a.E[i] - b.E[i]) / (2 * h);
      dB[i][j] = (a.B[i] - b.B[i]) / (2 * h);
    }
  }
}

void ZeroInitialFields::gradient(const Vec3&, double dE[3][3], double dB[3][3]) const {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) dE[i][j] = dB[i][j] = 0.0;
}

Vec3 CoulombImageField::single(const Vec3& x, const Vec3& c) const {
  const Vec3 d = x - c;
  const double r = norm(d);
  if (r == 0.0) return {};
  const double s = r / R_;
  double q;
  if (s < 1e-3) {
    // Q / r^2 ~ (4 pi A R^3 s^3 / 3) / r^2 for small s
    q = 4.0 * std::numbers::pi * A_ * r / 3.0 * (1.0 - 9.0 * s * s / 5.0);
    return (q / r) * d;
  }
  q = 4.0 * std::numbers::pi * A_ * R_ * R_ * R_ * bump_moment(s);
  return (q / (r * r * r)) * d;
}

FieldSample CoulombImageField::at(const Vec3& x) const {
  return {single(x, c_) - single(x, reflect(c_)), {}};
}

FieldSample CurlFields::at(const Vec3& x) const {
  FieldSample s;
  if (eE_ != 0.0) {
    const Vec3 d = x - cE_;
    const double G = std::exp(-0.5 * norm2(d) / (sE_ * sE_));
    // curl(0, 0, a) = (d2 a, -d1 a, 0), a = x3 G
    s.E = eE_ * Vec3{-x[2] * d[1] / (sE_ * sE_) * G, x[2] * d[0] / (sE_ * sE_) * G, 0.0};
  }
  if (eB_ != 0.0) {
    const Vec3 d = x - cB_;
    const double G = std::exp(-0.5 * norm2(d) / (sB_ * sB_));
    s.B = eB_ * Vec3{-d[1] / (sB_ * sB_) * G, d[0] / (sB_ * sB_) * G, 0.0};
  }
  return s;
}

FieldSample SumInitialFields::at(const Vec3& x) const {
  FieldSample s;
  for (const auto& p : parts_) {
    const FieldSample q = p->at(x);
    s.E += q.E;
    s.B += q.B;
  }
  return s;
}

void SumInitialFields::gradient(const Vec3& x, double dE[3][3], double dB[3][3]) const {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) dE[i][j] = dB[i][j] = 0.0;
  for (const auto& p : parts_) {
    double a[3][3], b[3][3];
    p->gradient(x, a, b);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        dE[i][j] += a[i][j];
        dB[i][j] += b[i][j];
      }
  }
}

CompatibilityReport compatibility_check(const InitialFieldData& init, const InitialDensity& f0,
                                        const VelocityGrid& vg, const Box& region, int n, double rel_tol) {
  CompatibilityReport r;
  StaticDensity fs(std::shared_ptr<const InitialDensity>(&f0, [](const InitialDensity*) {}));
  double rho_max = 0.0, grad_max = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const Vec3 x{region.lo[0] + (a + 0.5) / n * (region.hi[0] - region.lo[0]),
                     region.lo[1] + (b + 0.5) / n * (region.hi[1] - region.lo[1]),
                     region.lo[2] + (c + 0.5) / n * (region.hi[2] - region.lo[2])};
        double dE[3][3], dB[3][3];
        init.gradient(x, dE, dB);
        const double rho = compute_moments(fs, 0.0, x, vg).rho;
        rho_max = std::fmax(rho_max, std::fabs(rho));
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) grad_max = std::fmax(grad_max, std::fabs(dE[i][j]) + std::fabs(dB[i][j]));
        r.gauss_E = std::fmax(r.gauss_E, std::fabs(dE[0][0] + dE[1][1] + dE[2][2] - 4 * std::numbers::pi * rho));
        r.gauss_B = std::fmax(r.gauss_B, std::fabs(dB[0][0] + dB[1][1] + dB[2][2]));
        if (c == 0) {
          const FieldSample w = init.at({x[0], x[1], 0.0});
          r.wall_E_tan = std::fmax(r.wall_E_tan, std::fmax(std::fabs(w.E[0]), std::fabs(w.E[1])));
          r.wall_B_norm = std::fmax(r.wall_B_norm, std::fabs(w.B[2]));
        }
      }
  r.scale = grad_max + 4 * std::numbers::pi * rho_max;
  const double tol = rel_tol * (r.scale > 0.0 ? r.scale : 1.0);
  r.ok = r.gauss_E <= tol && r.gauss_B <= tol && r.wall_E_tan <= tol && r.wall_B_norm <= tol;
  return r;
}

}  // namespace hsvm
