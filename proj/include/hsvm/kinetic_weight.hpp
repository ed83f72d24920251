#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hsvm/core_model.hpp"
#include "hsvm/fields.hpp"

namespace hsvm {

// Boundary traces E3(t,x||,0), B(t,x||,0) come from `fields` evaluated on the wall.
struct WeightContext {
  const FieldEvaluator* fields = nullptr;
  Environment env;
  double c0 = 0.0;          // sign-condition margin, see measure_margin
  double eps_alpha = 1e-8;  // floor for divisions by alpha
};

class SignConditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// F3 evaluated at the wall point below x.
double wall_force3(double t, const Vec3& x, const Vec3& v, const WeightContext& ctx);

// sqrt(x3^2 + vhat3^2 - 2 F3(t,x||,0,v) x3 / <v>); equals |vhat3| on the wall.
double alpha(double t, const Vec3& x, const Vec3& v, const WeightContext& ctx);

// Runs pr_condition_check on a deterministic sample of the wall over
// [-L, L]^2 x [0, T] x {|v| <= vmax}; stores the margin in ctx.c0.
PrReport measure_margin(WeightContext& ctx, double L, double T, double vmax, std::size_t n = 4096);

struct AlphaIntegral {
  double value = 0.0;     // int_{|v|<=M} dv / alpha
  double weighted = 0.0;  // int_{|v|<=M} <v>^{-4-delta} dv / alpha
  double bound = 0.0;     // 4 M^3 ln(1 + 1/x3)
  int refinements = 0;
  double last_change = 0.0;
  std::size_t floor_hits = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate(estimate) {}
  double estimate;
};

// Spherical product rule (Gauss-Legendre in |v| and in the polar cosine with panels
// graded toward v3 = 0, trapezoid in azimuth), doubled until successive estimates
// differ by less than rel_tol.
AlphaIntegral alpha_ball_integral(double x3, double M, const WeightContext& ctx, double t = 0.0,
                                  double x1 = 0.0, double x2 = 0.0, double rel_tol = 0.01,
                                  int max_refinements = 8);

struct VelocityLemmaReport {
  bool degenerate = false;   // alpha vanishes at the reference point
  bool hit_zero = false;     // alpha vanished along a non-grazing trajectory
  double max_log_slope = 0.0;    // sup |log a(s) - log a(t)| / |t - s|
  double max_local_slope = 0.0;  // sup |d log a / ds| between consecutive samples
  double implied_C = 0.0;        // max_log_slope * c0 / 20
  std::size_t samples = 0;
};

VelocityLemmaReport velocity_lemma_audit(const Trajectory& traj, const WeightContext& ctx);

}  // namespace hsvm
