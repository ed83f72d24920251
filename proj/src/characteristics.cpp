#include "hsvm/characteristics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hsvm/kinetic_weight.hpp"
#include "hsvm/quadrature.hpp"

namespace hsvm {

namespace {

struct State {
  Vec3 x;
  Vec3 v;
};

inline Vec3 force_at(double s, const Vec3& x, const Vec3& v, const FieldEvaluator& f, const Environment& env) {
  const FieldSample fs = f.at(s, x);
  return lorentz_force(fs.E, fs.B, v, env);
}

State rk4_step(double s, const State& y, double h, const FieldEvaluator& f, const Environment& env,
               const Vec3* F0 = nullptr) {
  const Vec3 k1x = rel_velocity(y.v);
  const Vec3 k1v = F0 ? *F0 : force_at(s, y.x, y.v, f, env);
  const Vec3 x2 = y.x + 0.5 * h * k1x, v2 = y.v + 0.5 * h * k1v;
  const Vec3 k2x = rel_velocity(v2);
  const Vec3 k2v = force_at(s + 0.5 * h, x2, v2, f, env);
  const Vec3 x3 = y.x + 0.5 * h * k2x, v3 = y.v + 0.5 * h * k2v;
  const Vec3 k3x = rel_velocity(v3);
  const Vec3 k3v = force_at(s + 0.5 * h, x3, v3, f, env);
  const Vec3 x4 = y.x + h * k3x, v4 = y.v + h * k3v;
  const Vec3 k4x = rel_velocity(v4);
  const Vec3 k4v = force_at(s + h, x4, v4, f, env);
  return {y.x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          y.v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

inline double step_size(const Vec3& v, const Vec3& F, const OdeOptions& o) {
  return std::fmin(o.max_dt, o.step_factor * jbracket(v) / (1.0 + norm(F)));
}

[[noreturn]] void budget_exceeded(const State& y, double s) {
  std::ostringstream os;
  os << "characteristic step budget exceeded at s=" << s;
  throw StepBudgetError(os.str(), {y.x, y.v}, s);
}

template <class OnStep>
State march(double t, const State& y0, double s_target, const FieldEvaluator& f, const Environment& env,
            const OdeOptions& o, OnStep&& on_step) {
  State y = y0;
  double s = t;
  const double dir = s_target >= t ? 1.0 : -1.0;
  std::size_t n = 0;
  while (dir * (s_target - s) > 0.0) {
    const Vec3 F = force_at(s, y.x, y.v, f, env);
    double h = step_size(y.v, F, o);
    const double rem = dir * (s_target - s);
    const bool last = h >= rem;
    if (last) h = rem;
    y = rk4_step(s, y, dir * h, f, env, &F);
    s = last ? s_target : s + dir * h;
    on_step(s, y);
    if (++n > o.max_steps) budget_exceeded(y, s);
  }
  return y;
}

}  // namespace

PhasePoint integrate(double t, const Vec3& x, const Vec3& v, double s_target, const FieldEvaluator& fields,
                     const Environment& env, const OdeOptions& opts) {
  const State y = march(t, {x, v}, s_target, fields, env, opts, [](double, const State&) {});
  return {y.x, y.v};
}

Trajectory trace(double t, const Vec3& x, const Vec3& v, double s_target, const FieldEvaluator& fields,
                 const Environment& env, const OdeOptions& opts) {
  Trajectory tr;
  tr.push_back({t, x, v});
  march(t, {x, v}, s_target, fields, env, opts,
        [&](double s, const State& y) { tr.push_back({s, y.x, y.v}); });
  return tr;
}

ExitEvent backward_exit(double t, const Vec3& x, const Vec3& v, const FieldEvaluator& fields,
                        const Environment& env, const OdeOptions& opts, double s_stop) {
  if (x[2] < 0.0) throw std::invalid_argument("backward_exit: start point below the wall");
  ExitEvent e;
  e.sup_jv = jbracket(v);
  bool ignore_wall = false;
  if (x[2] == 0.0) {
    if (v[2] > 0.0) {
      e.t_b = 0.0;
      e.x_b = x;
      e.v_b = v;
      e.grazing = v[2] / jbracket(v) < opts.eps_graze;
      return e;
    }
    if (v[2] == 0.0) {
      // start on the grazing set: traced as an interior point
      e.grazing = true;
      ignore_wall = true;
    }
  }
  State y{x, v};
  double s = t;
  std::size_t n = 0;
  while (s > s_stop) {
    const Vec3 F = force_at(s, y.x, y.v, fields, env);
    double h = step_size(y.v, F, opts);
    const bool last = h >= s - s_stop;
    if (last) h = s - s_stop;
    const State yn = rk4_step(s, y, -h, fields, env, &F);
    if (!ignore_wall && yn.x[2] < 0.0) {
      double lo = 0.0, hi = h;
      while (hi - lo > opts.tol_exit) {
        const double mid = 0.5 * (lo + hi);
        if (rk4_step(s, y, -mid, fields, env, &F).x[2] < 0.0) hi = mid;
        else lo = mid;
      }
      const double tau = 0.5 * (lo + hi);
      const State yb = rk4_step(s, y, -tau, fields, env, &F);
      e.t_b = t - (s - tau);
      e.x_b = {yb.x[0], yb.x[1], 0.0};
      e.v_b = yb.v;
      e.sup_jv = std::fmax(e.sup_jv, jbracket(yb.v));
      e.grazing = std::fabs(yb.v[2] / jbracket(yb.v)) < opts.eps_graze;
      return e;
    }
    y = yn;
    s = last ? s_stop : s - h;
    e.sup_jv = std::fmax(e.sup_jv, jbracket(y.v));
    if (++n > opts.max_steps) budget_exceeded(y, s);
  }
  e.reached_initial_time = true;
  e.t_b = t - s_stop;
  e.x_b = y.x;
  e.v_b = y.v;
  return e;
}

SpecularResult specular_flow(double t, const Vec3& x, const Vec3& v, double s, const FieldEvaluator& fields,
                             const Environment& env, const OdeOptions& opts, int k_max) {
  SpecularResult r;
  double tc = t;
  Vec3 xc = x, vc = v;
  for (;;) {
    const ExitEvent e = backward_exit(tc, xc, vc, fields, env, opts, s);
    if (e.reached_initial_time) {
      r.X = e.x_b;
      r.V = e.v_b;
      r.grazing = r.grazing || e.grazing;
      return r;
    }
    const double tk = tc - e.t_b;
    if (e.grazing) {
      r.grazing = true;
      const PhasePoint p = integrate(tk, e.x_b, e.v_b, s, fields, env, opts);
      r.X = p.x;
      r.V = p.v;
      return r;
    }
    Bounce b;
    b.t = tk;
    b.x = e.x_b;
    b.v_in = e.v_b;
    b.v_out = {e.v_b[0], e.v_b[1], -e.v_b[2]};
    if (static_cast<int>(r.cycles.bounces.size()) >= k_max) {
      r.cycles.truncated = true;
      r.X = b.x;
      r.V = b.v_out;
      return r;
    }
    r.cycles.bounces.push_back(b);
    tc = tk;
    xc = b.x;
    vc = b.v_out;
  }
}

double c_mu() {
  static const double value = [] {
    const QuadRule q = gauss_legendre(128, 0.0, 14.0);
    double I = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double r = q.x[k];
      I += q.w[k] * r * r * r / std::sqrt(1.0 + r * r) * std::exp(-0.5 * r * r);
    }
    return 1.0 / (std::numbers::pi * std::pow(2.0 * std::numbers::pi, -1.5) * I);
  }();
  return value;
}

// proposal q(v) = v3 exp(-|v|^2/2) / (2 pi) on v3 > 0; target c_mu (2 pi)^{-3/2} vhat3 e^{-|v|^2/2}
double diffuse_envelope_constant() { return c_mu() / std::sqrt(2.0 * std::numbers::pi); }

Vec3 diffuse_resample(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (;;) {
    const double a = nd(rng), b = nd(rng);
    const double u = 1.0 - ud(rng);  // (0, 1]
    const Vec3 v{a, b, std::sqrt(-2.0 * std::log(u))};
    if (ud(rng) * jbracket(v) < 1.0) return v;
  }
}

namespace {
inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, double t, const Vec3& x, const Vec3& v) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ std::bit_cast<std::uint64_t>(t));
  for (int c = 0; c < 3; ++c) h = splitmix(h ^ std::bit_cast<std::uint64_t>(x[c]));
  for (int c = 0; c < 3; ++c) h = splitmix(h ^ std::bit_cast<std::uint64_t>(v[c]));
  return h;
}

const char* closure_name(ClosureKind k) {
  switch (k) {
    case ClosureKind::Inflow: return "inflow";
    case ClosureKind::Diffuse: return "diffuse";
    case ClosureKind::Specular: return "specular";
  }
  return "?";
}

ClosureKind closure_from_name(const std::string& s) {
  if (s == "inflow") return ClosureKind::Inflow;
  if (s == "diffuse") return ClosureKind::Diffuse;
  if (s == "specular") return ClosureKind::Specular;
  throw ConfigError("bc.kind must be one of inflow, diffuse, specular (got '" + s + "')");
}

BoundaryClosure BoundaryClosure::make_inflow(std::shared_ptr<const InflowData> g) {
  BoundaryClosure c;
  c.kind = ClosureKind::Inflow;
  c.inflow = std::move(g);
  return c;
}

BoundaryClosure BoundaryClosure::make_diffuse() {
  BoundaryClosure c;
  c.kind = ClosureKind::Diffuse;
  c.cmu = c_mu();
  return c;
}

BoundaryClosure BoundaryClosure::make_specular() {
  BoundaryClosure c;
  c.kind = ClosureKind::Specular;
  return c;
}

KineticSolution::KineticSolution(std::shared_ptr<const FieldEvaluator> fields, Environment env,
                                 BoundaryClosure closure, std::shared_ptr<const InitialDensity> f0,
                                 OdeOptions ode, EvalOptions eval)
    : fields_(std::move(fields)), env_(env), closure_(std::move(closure)), f0_(std::move(f0)), ode_(ode),
      eval_(eval) {
  if (!fields_) fields_ = std::make_shared<ZeroField>();
  if (!f0_) f0_ = std::make_shared<ZeroDensity>();
  if (closure_.kind == ClosureKind::Diffuse && closure_.cmu == 0.0) closure_.cmu = c_mu();
}

void KineticSolution::set_lagged_specular(std::shared_ptr<const PhaseDensity> prev) {
  lagged_prev_ = std::move(prev);
}

void KineticSolution::set_lagged_diffuse(WallFluxFn flux) { lagged_flux_ = std::move(flux); }

Box KineticSolution::support(double t) const {
  Box b = f0_->support();
  if (!b.empty()) b = b.expanded(t);
  if (closure_.kind == ClosureKind::Inflow && closure_.inflow) {
    Box w = closure_.inflow->support();
    if (!w.empty()) b = Box::unite(b, w.expanded(t));
  }
  if (!b.empty()) b.lo[2] = std::fmax(b.lo[2], 0.0);
  return b;
}

ExitEvent KineticSolution::exit_with_convention(double t, const Vec3& x, const Vec3& v, FValue& out) const {
  ExitEvent e = backward_exit(t, x, v, *fields_, env_, ode_);
  if (e.grazing && !e.reached_initial_time) {
    // grazing contact: pulled back as an interior point
    out.grazing = true;
    grazing_.fetch_add(1, std::memory_order_relaxed);
    const PhasePoint p = integrate(t - e.t_b, e.x_b, e.v_b, 0.0, *fields_, env_, ode_);
    e.reached_initial_time = true;
    e.x_b = p.x;
    e.v_b = p.v;
    e.t_b = t;
  } else if (e.grazing) {
    out.grazing = true;
    grazing_.fetch_add(1, std::memory_order_relaxed);
  }
  return e;
}

FValue KineticSolution::eval_inflow(double t, const Vec3& x, const Vec3& v) const {
  FValue out;
  const ExitEvent e = exit_with_convention(t, x, v, out);
  if (e.reached_initial_time) {
    out.value = std::fmax(0.0, f0_->value(e.x_b, e.v_b));
  } else {
    out.bounces = 1;
    out.value = closure_.inflow ? std::fmax(0.0, closure_.inflow->value(t - e.t_b, e.x_b[0], e.x_b[1], e.v_b)) : 0.0;
  }
  return out;
}

FValue KineticSolution::eval_specular(double t, const Vec3& x, const Vec3& v) const {
  FValue out;
  if (lagged_prev_) {
    const ExitEvent e = exit_with_convention(t, x, v, out);
    if (e.reached_initial_time) {
      out.value = std::fmax(0.0, f0_->value(e.x_b, e.v_b));
    } else {
      out.bounces = 1;
      const Vec3 vr{e.v_b[0], e.v_b[1], -e.v_b[2]};
      out.value = lagged_prev_->value(t - e.t_b, e.x_b, vr);
    }
    return out;
  }
  const SpecularResult r = specular_flow(t, x, v, 0.0, *fields_, env_, ode_, eval_.k_max);
  out.bounces = static_cast<int>(r.cycles.count());
  out.grazing = r.grazing;
  out.truncated = r.cycles.truncated;
  if (r.grazing) grazing_.fetch_add(1, std::memory_order_relaxed);
  if (r.cycles.truncated) truncated_.fetch_add(1, std::memory_order_relaxed);
  // a truncated cycle is frozen at its last bounce point
  out.value = std::fmax(0.0, f0_->value(r.X, r.V));
  return out;
}

FValue KineticSolution::eval_diffuse(double t, const Vec3& x, const Vec3& v) const {
  FValue out;
  if (lagged_flux_) {
    const ExitEvent e = exit_with_convention(t, x, v, out);
    if (e.reached_initial_time) {
      out.value = std::fmax(0.0, f0_->value(e.x_b, e.v_b));
    } else {
      out.bounces = 1;
      out.value = closure_.cmu * maxwellian_mu(e.v_b) * std::fmax(0.0, lagged_flux_(t - e.t_b, e.x_b[0], e.x_b[1]));
    }
    return out;
  }
  // stochastic cycles: at each wall contact u ~ c_mu mu |uhat3| on u3 < 0, weight mu(v_b) / mu(u)
  {
    FValue probe;
    const ExitEvent e = exit_with_convention(t, x, v, probe);
    if (e.reached_initial_time) {
      probe.value = std::fmax(0.0, f0_->value(e.x_b, e.v_b));
      return probe;
    }
  }
  std::mt19937_64 rng(stream_seed(eval_.seed, t, x, v));
  double sum = 0.0, scale = 0.0;
  int max_b = 0;
  for (int p = 0; p < eval_.n_mc; ++p) {
    double tc = t, w = 1.0;
    Vec3 xc = x, vc = v;
    double contrib = 0.0;
    int k = 0;
    for (;; ++k) {
      FValue tmp;
      const ExitEvent e = exit_with_convention(tc, xc, vc, tmp);
      out.grazing = out.grazing || tmp.grazing;
      if (e.reached_initial_time) {
        contrib = w * std::fmax(0.0, f0_->value(e.x_b, e.v_b));
        break;
      }
      if (k >= eval_.k_max) {
        out.truncated = true;
        truncated_.fetch_add(1, std::memory_order_relaxed);
        break;
      }
      Vec3 u = diffuse_resample(rng);
      u[2] = -u[2];
      w *= maxwellian_mu(e.v_b) / maxwellian_mu(u);
      tc -= e.t_b;
      xc = e.x_b;
      vc = u;
    }
    max_b = std::max(max_b, k);
    sum += contrib;
    scale = std::fmax(scale, std::fabs(contrib));
  }
  out.value = sum / eval_.n_mc;
  out.bounces = max_b;
  out.bias_bound = scale * std::ldexp(1.0, -eval_.k_max);
  return out;
}

FValue KineticSolution::evaluate(double t, const Vec3& x, const Vec3& v) const {
  switch (closure_.kind) {
    case ClosureKind::Inflow: return eval_inflow(t, x, v);
    case ClosureKind::Specular: return eval_specular(t, x, v);
    case ClosureKind::Diffuse: return eval_diffuse(t, x, v);
  }
  return {};
}

FValue evaluate_f(double t, const Vec3& x, const Vec3& v, std::shared_ptr<const FieldEvaluator> fields,
                  const BoundaryClosure& closure, std::shared_ptr<const InitialDensity> f0,
                  const Environment& env, const OdeOptions& ode, const EvalOptions& eval) {
  KineticSolution ks(std::move(fields), env, closure, std::move(f0), ode, eval);
  return ks.evaluate(t, x, v);
}

TbAuditReport tb_bound_audit(const std::vector<PhasePoint>& points, double t, const FieldEvaluator& fields,
                             const Environment& env, double c0, const OdeOptions& opts) {
  TbAuditReport r;
  r.samples = points.size();
  if (!(c0 > 0.0)) {
    r.refused = true;
    return r;
  }
  for (const auto& p : points) {
    const ExitEvent e = backward_exit(t, p.x, p.v, fields, env, opts);
    if (e.reached_initial_time || e.grazing) continue;
    const double vb3 = e.v_b[2] / jbracket(e.v_b);
    if (!(vb3 > 0.0)) continue;
    ++r.exits;
    r.max_ratio = std::fmax(r.max_ratio, (e.t_b / e.sup_jv) / vb3);
  }
  return r;
}

JacobianReport specular_jacobian_audit(double t, const Vec3& x, const Vec3& v, double s, double h,
                                       const FieldEvaluator& fields, const Environment& env,
                                       const OdeOptions& opts) {
  JacobianReport rep;
  const SpecularResult base = specular_flow(t, x, v, s, fields, env, opts);
  rep.bounces = static_cast<int>(base.cycles.count());
  WeightContext ctx{&fields, env};
  rep.alpha = alpha(t, x, v, ctx);
  rep.jv = jbracket(v);
  for (int j = 0; j < 6; ++j) {
    Vec3 xp = x, vp = v, xm = x, vm = v;
    if (j < 3) {
      xp[j] += h;
      xm[j] -= h;
    } else {
      vp[j - 3] += h;
      vm[j - 3] -= h;
    }
    if (xm[2] < 0.0) {
      rep.skipped = true;
      return rep;
    }
    const SpecularResult a = specular_flow(t, xp, vp, s, fields, env, opts);
    const SpecularResult b = specular_flow(t, xm, vm, s, fields, env, opts);
    if (a.cycles.count() != base.cycles.count() || b.cycles.count() != base.cycles.count() || a.grazing ||
        b.grazing) {
      rep.skipped = true;
      return rep;
    }
    for (int i = 0; i < 3; ++i) {
      rep.J[i][j] = (a.X[i] - b.X[i]) / (2.0 * h);
      rep.J[3 + i][j] = (a.V[i] - b.V[i]) / (2.0 * h);
    }
  }
  for (auto& row : rep.J)
    for (double e : row) rep.max_entry = std::fmax(rep.max_entry, std::fabs(e));
  return rep;
}

double fit_jacobian_growth(const std::vector<JacobianReport>& reps) {
  const JacobianReport* ref = nullptr;
  for (const auto& r : reps)
    if (!r.skipped && r.alpha > 0.0 && (!ref || r.alpha * r.jv > ref->alpha * ref->jv)) ref = &r;
  if (!ref) return 0.0;
  const double C = ref->max_entry / ref->jv;
  double K = 0.0;
  for (const auto& r : reps) {
    if (r.skipped || r.alpha <= 0.0) continue;
    const double q = std::log(r.max_entry / (C * r.jv));
    if (q > 0.0) K = std::fmax(K, q * std::sqrt(r.alpha * r.jv));
  }
  return K;
}

}  // namespace hsvm
