#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "hsvm/core_model.hpp"
#include "hsvm/distributions.hpp"
#include "hsvm/fields.hpp"

namespace hsvm {

struct OdeOptions {
  double step_factor = 1e-2;  // h = min(max_dt, step_factor <V> / (1 + |F|))
  double max_dt = 1e-2;
  std::size_t max_steps = 10'000'000;
  double tol_exit = 1e-10;
  double eps_graze = 1e-8;
};

class StepBudgetError : public std::runtime_error {
 public:
  StepBudgetError(const std::string& what, PhasePoint partial, double s_reached)
      : std::runtime_error(what), partial(partial), s_reached(s_reached) {}
  PhasePoint partial;
  double s_reached;
};

// RK4 for dX/ds = Vhat, dV/ds = F(s, X, V) from time t to s_target (either direction).
PhasePoint integrate(double t, const Vec3& x, const Vec3& v, double s_target, const FieldEvaluator& fields,
                     const Environment& env, const OdeOptions& opts = {});

// Same, recording every step.  No wall handling.
Trajectory trace(double t, const Vec3& x, const Vec3& v, double s_target, const FieldEvaluator& fields,
                 const Environment& env, const OdeOptions& opts = {});

struct ExitEvent {
  double t_b = 0.0;
  Vec3 x_b;
  Vec3 v_b;
  bool reached_initial_time = false;  // then (x_b, v_b) = (X(s_stop), V(s_stop))
  bool grazing = false;               // |vhat_b3| < eps_graze
  double sup_jv = 1.0;                // sup <V(s)> along the traced piece
};

// First backward contact with x3 = 0 (or arrival at s_stop).  A start on the wall
// with v3 > 0 exits at once (the point carries incoming data); v3 < 0 traces into
// the half space.
ExitEvent backward_exit(double t, const Vec3& x, const Vec3& v, const FieldEvaluator& fields,
                        const Environment& env, const OdeOptions& opts = {}, double s_stop = 0.0);

struct Bounce {
  double t = 0.0;
  Vec3 x;
  Vec3 v_in;   // velocity reaching the wall (v3 >= 0 seen backward)
  Vec3 v_out;  // reflected velocity
};

struct CycleRecord {
  std::vector<Bounce> bounces;
  bool truncated = false;
  std::size_t count() const { return bounces.size(); }
};

struct SpecularResult {
  Vec3 X;
  Vec3 V;
  CycleRecord cycles;
  bool grazing = false;
};

// Backward specular characteristic from (t, x, v) down to time s <= t.
SpecularResult specular_flow(double t, const Vec3& x, const Vec3& v, double s, const FieldEvaluator& fields,
                             const Environment& env, const OdeOptions& opts = {}, int k_max = 16);

// c_mu with c_mu * int_{v3 > 0} vhat3 mu dv = 1
double c_mu();
// Envelope constant K of the acceptance-rejection sampler: target <= K * proposal.
double diffuse_envelope_constant();
// v3 > 0 sample with density c_mu vhat3 mu(v).
Vec3 diffuse_resample(std::mt19937_64& rng);
// Per-call stream derived from (seed, t, x, v), independent of scheduling.
std::uint64_t stream_seed(std::uint64_t seed, double t, const Vec3& x, const Vec3& v);

enum class ClosureKind { Inflow, Diffuse, Specular };
const char* closure_name(ClosureKind k);
ClosureKind closure_from_name(const std::string& s);

struct BoundaryClosure {
  ClosureKind kind = ClosureKind::Inflow;
  std::shared_ptr<const InflowData> inflow;  // Inflow only
  double T_w = 1.0;                          // Diffuse only
  double cmu = 0.0;                          // Diffuse only

  static BoundaryClosure make_inflow(std::shared_ptr<const InflowData> g);
  static BoundaryClosure make_diffuse();
  static BoundaryClosure make_specular();
};

// Outgoing wall flux int_{u3 < 0} f(t, x||, 0, u) |uhat3| du, used by the lagged diffuse closure.
using WallFluxFn = std::function<double(double t, double x1, double x2)>;

struct EvalOptions {
  std::uint64_t seed = 0;
  int n_mc = 64;
  int k_max = 16;
};

struct FValue {
  double value = 0.0;
  int bounces = 0;
  bool grazing = false;
  bool truncated = false;
  double bias_bound = 0.0;  // diffuse truncation bias estimate
};

// f along backward characteristics of a frozen field with one of the wall closures.
// Wall data for diffuse/specular either come from cycles of f itself (default) or from
// a previous iterate (set_lagged_*), which is the form used by the outer iteration.
class KineticSolution final : public PhaseDensity {
 public:
  KineticSolution(std::shared_ptr<const FieldEvaluator> fields, Environment env, BoundaryClosure closure,
                  std::shared_ptr<const InitialDensity> f0, OdeOptions ode = {}, EvalOptions eval = {});

  void set_lagged_specular(std::shared_ptr<const PhaseDensity> prev);
  void set_lagged_diffuse(WallFluxFn flux);

  double value(double t, const Vec3& x, const Vec3& v) const override { return evaluate(t, x, v).value; }
  Box support(double t) const override;
  FValue evaluate(double t, const Vec3& x, const Vec3& v) const;

  const FieldEvaluator& fields() const { return *fields_; }
  std::shared_ptr<const FieldEvaluator> fields_ptr() const { return fields_; }
  const Environment& env() const { return env_; }
  const BoundaryClosure& closure() const { return closure_; }
  const OdeOptions& ode() const { return ode_; }
  const EvalOptions& eval_options() const { return eval_; }
  const InitialDensity& f0() const { return *f0_; }
  bool lagged() const { return lagged_prev_ != nullptr || static_cast<bool>(lagged_flux_); }

  std::uint64_t grazing_count() const { return grazing_.load(); }
  std::uint64_t truncation_count() const { return truncated_.load(); }

 private:
  FValue eval_inflow(double t, const Vec3& x, const Vec3& v) const;
  FValue eval_specular(double t, const Vec3& x, const Vec3& v) const;
  FValue eval_diffuse(double t, const Vec3& x, const Vec3& v) const;
  ExitEvent exit_with_convention(double t, const Vec3& x, const Vec3& v, FValue& out) const;

  std::shared_ptr<const FieldEvaluator> fields_;
  Environment env_;
  BoundaryClosure closure_;
  std::shared_ptr<const InitialDensity> f0_;
  OdeOptions ode_;
  EvalOptions eval_;
  std::shared_ptr<const PhaseDensity> lagged_prev_;
  WallFluxFn lagged_flux_;
  mutable std::atomic<std::uint64_t> grazing_{0};
  mutable std::atomic<std::uint64_t> truncated_{0};
};

// Convenience wrapper with the default cycle closures.
FValue evaluate_f(double t, const Vec3& x, const Vec3& v, std::shared_ptr<const FieldEvaluator> fields,
                  const BoundaryClosure& closure, std::shared_ptr<const InitialDensity> f0,
                  const Environment& env, const OdeOptions& ode = {}, const EvalOptions& eval = {});

struct TbAuditReport {
  bool refused = false;
  double max_ratio = 0.0;  // max [t_b / sup <V>] / vhat_b3
  std::size_t exits = 0;
  std::size_t samples = 0;
};

TbAuditReport tb_bound_audit(const std::vector<PhasePoint>& points, double t, const FieldEvaluator& fields,
                             const Environment& env, double c0, const OdeOptions& opts = {});

struct JacobianReport {
  bool skipped = false;  // stencil straddles a change in bounce count
  double J[6][6] = {};   // d(X, V)(s) / d(x, v)
  double max_entry = 0.0;
  double alpha = 0.0;
  double jv = 1.0;
  int bounces = 0;
};

// Central differences of the specular flow map (x, v) -> (X_cl(s), V_cl(s)).
JacobianReport specular_jacobian_audit(double t, const Vec3& x, const Vec3& v, double s, double h,
                                       const FieldEvaluator& fields, const Environment& env,
                                       const OdeOptions& opts = {});

// Smallest K with max_entry <= C <v> exp(K / sqrt(alpha <v>)) over the family, C fitted at the
// least singular member.
double fit_jacobian_growth(const std::vector<JacobianReport>& reps);

}  // namespace hsvm
