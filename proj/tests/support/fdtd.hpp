#pragma once

#include <functional>
#include <vector>

#include "hsvm/fields.hpp"

namespace oracle {

using hsvm::Vec3;

// Yee scheme for dE/dt = curl B - 4 pi J, dB/dt = -curl E on [-L, L]^2 x [0, Lz]
// with perfectly conducting faces (the z = 0 face is the wall; the others are far away).
class YeePec {
 public:
  using CurrentFn = std::function<Vec3(double t, const Vec3& x)>;
  using InitFn = std::function<hsvm::FieldSample(const Vec3& x)>;

  YeePec(double L, double Lz, double h);

  // E(0), B(0); B is advanced to dt/2 internally
  void initialize(const InitFn& init, double dt);
  // J is only sampled inside `active` (zero elsewhere)
  void advance_to(double T, const CurrentFn& J, const hsvm::Box& active_at_T);

  // second-order interpolation of the staggered components at time()
  hsvm::FieldSample at(const Vec3& x) const;
  double time() const { return t_; }
  double h() const { return h_; }

 private:
  std::size_t id(int i, int j, int k) const { return (static_cast<std::size_t>(i) * ny_ + j) * nz_ + k; }
  double sample(const std::vector<double>& a, const Vec3& offset, const Vec3& x) const;
  void step_B(double frac);
  void step_E(double t_half, const CurrentFn& J, const hsvm::Box& active);

  double L_, Lz_, h_, dt_ = 0.0, t_ = 0.0;
  int nx_, ny_, nz_;  // node counts
  std::vector<double> ex_, ey_, ez_, bx_, by_, bz_;
  std::vector<double> bx_old_, by_old_, bz_old_;
};

}  // namespace oracle
