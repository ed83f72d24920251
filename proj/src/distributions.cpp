#include "hsvm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsvm/quadrature.hpp"

namespace hsvm {

double maxwellian_mu(const Vec3& v) {
  static const double c = std::pow(2.0 * std::numbers::pi, -1.5);
  return c * std::exp(-0.5 * norm2(v));
}

double bump_profile(double s) {
  if (s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q;
}

double bump_moment(double s) {
  if (s > 1.0) s = 1.0;
  const double s3 = s * s * s, s5 = s3 * s * s, s7 = s5 * s * s, s9 = s7 * s * s;
  return s3 / 3.0 - 3.0 * s5 / 5.0 + 3.0 * s7 / 7.0 - s9 / 9.0;
}

BumpMaxwellian::BumpMaxwellian(double amplitude, Vec3 center, double radius, Vec3 drift, double theta)
    : amp_(amplitude), c_(center), R_(radius), u_(drift), th_(theta),
      norm_(std::pow(2.0 * std::numbers::pi * theta * theta, -1.5)) {}

double BumpMaxwellian::velocity_factor(const Vec3& v) const {
  return norm_ * std::exp(-0.5 * norm2(v - u_) / (th_ * th_));
}

double BumpMaxwellian::value(const Vec3& x, const Vec3& v) const {
  const double d2 = norm2(x - c_);
  if (d2 >= R_ * R_) return 0.0;
  return amp_ * bump_profile(std::sqrt(d2) / R_) * velocity_factor(v);
}

Box BumpMaxwellian::support() const {
  Box b{c_ - Vec3{R_, R_, R_}, c_ + Vec3{R_, R_, R_}};
  b.lo[2] = std::fmax(b.lo[2], 0.0);
  return b;
}

double GrazingDecayed::value(const Vec3& x, const Vec3& v) const {
  const double base = base_->value(x, v);
  if (base == 0.0) return 0.0;
  const double jv = jbracket(v);
  const double vh3 = v[2] / jv;
  const double a2 = x[2] * x[2] + vh3 * vh3 + 2.0 * g_ * x[2] / jv;
  if (a2 <= 0.0) return 0.0;
  return base * std::exp(-beta_ / std::sqrt(std::sqrt(a2) * jv));
}

GaussianInflow::GaussianInflow(double amplitude, double c1, double c2, double width, Vec3 drift,
                               double theta, double mod_amp, double mod_freq)
    : amp_(amplitude), c1_(c1), c2_(c2), s_(width), u_(drift), th_(theta), a_(mod_amp), w_(mod_freq),
      norm_(std::pow(2.0 * std::numbers::pi * theta * theta, -1.5)) {}

double GaussianInflow::value(double t, double x1, double x2, const Vec3& v) const {
  if (!(v[2] > 0.0)) return 0.0;
  const double d2 = (x1 - c1_) * (x1 - c1_) + (x2 - c2_) * (x2 - c2_);
  return amp_ * std::exp(-0.5 * d2 / (s_ * s_)) * (1.0 + a_ * std::sin(w_ * t)) * norm_ *
         std::exp(-0.5 * norm2(v - u_) / (th_ * th_));
}

Box GaussianInflow::support() const {
  // exp(-d^2 / 2 s^2) < 1e-16 beyond 8.6 s
  const double r = 8.6 * s_;
  return {{c1_ - r, c2_ - r, 0.0}, {c1_ + r, c2_ + r, 0.0}};
}

}  // namespace hsvm

namespace hsvm {

GrazingBump::GrazingBump(std::shared_ptr<const BumpMaxwellian> bump, double beta, double g)
    : bump_(std::move(bump)), beta_(beta), g_(g) {
  const Box b = bump_->support();
  z_hi_ = std::fmax(b.hi[2], 1e-3);
  const int nt = 129;
  const QuadRule& q = gauss_legendre(24);
  const double th = bump_->theta();
  const Vec3& u = bump_->drift();
  const double span = 7.0 * th;
  table_.resize(nt);
  for (int k = 0; k < nt; ++k) {
    const double x3 = z_hi_ * k / (nt - 1);
    double z = 0.0;
    for (std::size_t a = 0; a < q.x.size(); ++a)
      for (std::size_t c = 0; c < q.x.size(); ++c)
        for (std::size_t d = 0; d < q.x.size(); ++d) {
          const Vec3 v{u[0] + span * q.x[a], u[1] + span * q.x[c], u[2] + span * q.x[d]};
          z += q.w[a] * q.w[c] * q.w[d] * bump_->velocity_factor(v) * decay(x3, v);
        }
    table_[k] = z * span * span * span;
  }
}

double GrazingBump::decay(double x3, const Vec3& v) const {
  const double jv = jbracket(v);
  const double vh3 = v[2] / jv;
  const double a2 = x3 * x3 + vh3 * vh3 + 2.0 * g_ * x3 / jv;
  if (a2 <= 0.0) return 0.0;
  return std::exp(-beta_ / std::sqrt(std::sqrt(a2) * jv));
}

double GrazingBump::normalization(double x3) const {
  const double s = std::clamp(x3 / z_hi_, 0.0, 1.0) * (table_.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(s), table_.size() - 2);
  const double w = s - i;
  return (1.0 - w) * table_[i] + w * table_[i + 1];
}

double GrazingBump::value(const Vec3& x, const Vec3& v) const {
  const double rho = bump_->density(x);
  if (rho == 0.0) return 0.0;
  return rho * bump_->velocity_factor(v) * decay(x[2], v) / normalization(x[2]);
}

}  // namespace hsvm
