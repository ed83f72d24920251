#pragma once

#include <memory>
#include <vector>

#include "hsvm/distributions.hpp"
#include "hsvm/fields.hpp"

namespace hsvm {

// Time-zero fields E0, B0 on the closed half space (evaluable below the wall too).
class InitialFieldData {
 public:
  virtual ~InitialFieldData() = default;
  virtual FieldSample at(const Vec3& x) const = 0;
  // dE[i][j] = d_j E0_i, dB[i][j] = d_j B0_i; central differences unless overridden
  virtual void gradient(const Vec3& x, double dE[3][3], double dB[3][3]) const;
};

class ZeroInitialFields final : public InitialFieldData {
 public:
  FieldSample at(const Vec3&) const override { return {}; }
  void gradient(const Vec3&, double dE[3][3], double dB[3][3]) const override;
};

// Electrostatic field of the bump charge amplitude * bump(|x - c| / R) minus that of its
// mirror image, so div E0 = 4 pi rho0 in the half space and E0 is normal on the wall.
class CoulombImageField final : public InitialFieldData {
 public:
  CoulombImageField(double amplitude, Vec3 center, double radius) : A_(amplitude), c_(center), R_(radius) {}
  FieldSample at(const Vec3& x) const override;
  Vec3 single(const Vec3& x, const Vec3& c) const;

 private:
  double A_;
  Vec3 c_;
  double R_;
};

// Divergence-free fields compatible with the conductor:
// E0 = eps_e curl(0, 0, x3 G_e), B0 = eps_b curl(0, 0, G_b), G Gaussians.
class CurlFields final : public InitialFieldData {
 public:
  CurlFields(double eps_e, Vec3 ce, double se, double eps_b, Vec3 cb, double sb)
      : eE_(eps_e), cE_(ce), sE_(se), eB_(eps_b), cB_(cb), sB_(sb) {}
  FieldSample at(const Vec3& x) const override;

 private:
  double eE_;
  Vec3 cE_;
  double sE_;
  double eB_;
  Vec3 cB_;
  double sB_;
};

class SumInitialFields final : public InitialFieldData {
 public:
  explicit SumInitialFields(std::vector<std::shared_ptr<const InitialFieldData>> parts)
      : parts_(std::move(parts)) {}
  FieldSample at(const Vec3& x) const override;
  void gradient(const Vec3& x, double dE[3][3], double dB[3][3]) const override;

 private:
  std::vector<std::shared_ptr<const InitialFieldData>> parts_;
};

// E0, B0 as a static frozen field (the zeroth field iterate).
class StaticInitialField final : public FieldEvaluator {
 public:
  explicit StaticInitialField(std::shared_ptr<const InitialFieldData> d) : d_(std::move(d)) {}
  FieldSample at(double, const Vec3& x) const override { return d_->at(x); }

 private:
  std::shared_ptr<const InitialFieldData> d_;
};

struct CompatibilityReport {
  double gauss_E = 0.0;     // sup |div E0 - 4 pi rho0| on samples
  double gauss_B = 0.0;     // sup |div B0|
  double wall_E_tan = 0.0;  // sup |E0_1|, |E0_2| on the wall
  double wall_B_norm = 0.0; // sup |B0_3| on the wall
  double scale = 0.0;       // sup |grad E0| + 4 pi sup rho0, for relative tolerances
  bool ok = false;
};

struct VelocityGrid;
CompatibilityReport compatibility_check(const InitialFieldData& init, const InitialDensity& f0,
                                        const VelocityGrid& vg, const Box& region, int n = 6,
                                        double rel_tol = 1e-3);

}  // namespace hsvm
