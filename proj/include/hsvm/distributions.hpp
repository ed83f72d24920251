#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hsvm/core_model.hpp"

namespace hsvm {

// f(t, x, v) with a conservative spatial support box at time t.
class PhaseDensity {
 public:
  virtual ~PhaseDensity() = default;
  virtual double value(double t, const Vec3& x, const Vec3& v) const = 0;
  virtual Box support(double t) const = 0;
};

// Initial datum f0(x, v).
class InitialDensity {
 public:
  virtual ~InitialDensity() = default;
  virtual double value(const Vec3& x, const Vec3& v) const = 0;
  virtual Box support() const = 0;
};

// Inflow datum g(t, x||, v) on the incoming set v3 > 0.
class InflowData {
 public:
  virtual ~InflowData() = default;
  virtual double value(double t, double x1, double x2, const Vec3& v) const = 0;
  virtual Box support() const = 0;  // x3 range is [0, 0]
};

// f0 viewed as a time independent phase density (the zeroth Picard iterate).
class StaticDensity final : public PhaseDensity {
 public:
  explicit StaticDensity(std::shared_ptr<const InitialDensity> f0) : f0_(std::move(f0)) {}
  double value(double, const Vec3& x, const Vec3& v) const override { return f0_->value(x, v); }
  Box support(double) const override { return f0_->support(); }

 private:
  std::shared_ptr<const InitialDensity> f0_;
};

class ZeroDensity final : public InitialDensity {
 public:
  double value(const Vec3&, const Vec3&) const override { return 0.0; }
  Box support() const override { return Box::none(); }
};

// (2 pi)^{-3/2} exp(-|v|^2 / 2)
double maxwellian_mu(const Vec3& v);

// Compact smooth bump (1 - s^2)^3, s = |x - c| / R.
double bump_profile(double s);
// int_0^s (1 - q^2)^3 q^2 dq
double bump_moment(double s);

// amplitude * bump(|x - c| / R) * Maxwellian(v; drift u, thermal width theta), so rho0 = amplitude * bump.
class BumpMaxwellian final : public InitialDensity {
 public:
  BumpMaxwellian(double amplitude, Vec3 center, double radius, Vec3 drift, double theta);
  double value(const Vec3& x, const Vec3& v) const override;
  Box support() const override;

  double amplitude() const { return amp_; }
  const Vec3& center() const { return c_; }
  double radius() const { return R_; }
  const Vec3& drift() const { return u_; }
  double theta() const { return th_; }
  double density(const Vec3& x) const { return amp_ * bump_profile(norm(x - c_) / R_); }
  double velocity_factor(const Vec3& v) const;

 private:
  double amp_;
  Vec3 c_;
  double R_;
  Vec3 u_;
  double th_;
  double norm_;
};

// Multiplies a base datum by exp(-beta / sqrt(alpha0 <v>)), alpha0^2 = x3^2 + vhat3^2 + 2 g x3 / <v>,
// so f0 vanishes to infinite order on the grazing set.
class GrazingDecayed final : public InitialDensity {
 public:
  GrazingDecayed(std::shared_ptr<const InitialDensity> base, double beta, double g)
      : base_(std::move(base)), beta_(beta), g_(g) {}
  double value(const Vec3& x, const Vec3& v) const override;
  Box support() const override { return base_->support(); }

 private:
  std::shared_ptr<const InitialDensity> base_;
  double beta_;
  double g_;
};

// Bump density times a Maxwellian damped by the grazing factor above, renormalized at each
// height so that int f0 dv is exactly the bump density (keeps the Coulomb initial field exact).
class GrazingBump final : public InitialDensity {
 public:
  GrazingBump(std::shared_ptr<const BumpMaxwellian> bump, double beta, double g);
  double value(const Vec3& x, const Vec3& v) const override;
  Box support() const override { return bump_->support(); }
  const BumpMaxwellian& bump() const { return *bump_; }
  double beta() const { return beta_; }
  // int velocity_factor(v) * decay(x3, v) dv
  double normalization(double x3) const;

 private:
  double decay(double x3, const Vec3& v) const;
  std::shared_ptr<const BumpMaxwellian> bump_;
  double beta_;
  double g_;
  double z_hi_;
  std::vector<double> table_;
};

class ConstantInflow final : public InflowData {
 public:
  explicit ConstantInflow(double c) : c_(c) {}
  double value(double, double, double, const Vec3& v) const override { return v[2] > 0.0 ? c_ : 0.0; }
  Box support() const override { return {{-1e300, -1e300, 0.0}, {1e300, 1e300, 0.0}}; }

 private:
  double c_;
};

// amplitude * exp(-|x|| - c|||^2 / (2 s^2)) * (1 + a sin(w t)) * Maxwellian(v; drift u, width theta)
class GaussianInflow final : public InflowData {
 public:
  GaussianInflow(double amplitude, double c1, double c2, double width, Vec3 drift, double theta,
                 double mod_amp = 0.0, double mod_freq = 0.0);
  double value(double t, double x1, double x2, const Vec3& v) const override;
  Box support() const override;

 private:
  double amp_, c1_, c2_, s_;
  Vec3 u_;
  double th_, a_, w_, norm_;
};

}  // namespace hsvm
