// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed below.
//   hsvm_acceptance            run all criteria
//   hsvm_acceptance 3 7 11     run a subset
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fdtd.hpp"
#include "free_fall.hpp"
#include "hsvm/diagnostics.hpp"
#include "hsvm/parallel.hpp"
#include "hsvm/presets.hpp"
#include "hsvm/scenario.hpp"

using namespace hsvm;

namespace {

constexpr double kFreeStreamTol = 1e-8;
constexpr double kAlphaWallTol = 1e-12;
constexpr double kAlphaBoundSlack = 1.01;
constexpr double kVelocityLemmaC = 20.0;
constexpr double kVelocityLemmaMinMargin = 0.5;
constexpr double kNeumannClosedTol = 1e-6;
constexpr double kFdtdTol = 0.03;
constexpr double kDirichletFactor = 10.0;
constexpr double kNeumannLo = 0.35, kNeumannHi = 0.65;
constexpr double kGaussBOrder = 1.5;
constexpr double kSpeedDriftTol = 1e-10;
constexpr double kCmuTol = 0.01;
constexpr double kMassDriftTol = 0.01;
constexpr double kEnergyTol = 0.05;
constexpr double kGammaGrowth = 5.0, kGammaSpread = 2.0;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// A converged run of a preset, shared by the criteria that audit it.
struct ConvergedRun {
  RunConfig config;
  Problem problem;
  std::unique_ptr<Picard> picard;
  ConvergenceReport report;
  SourceModel source() const {
    const IterationState& s = picard->state();
    return {s.f.get(), s.transport.get(), problem.env};
  }
};

ConvergedRun& converged(const std::string& preset) {
  static std::map<std::string, std::unique_ptr<ConvergedRun>> cache;
  auto& slot = cache[preset];
  if (!slot) {
    slot = std::make_unique<ConvergedRun>();
    slot->config = preset_config(preset);
    slot->problem = make_problem(slot->config);
    slot->picard = std::make_unique<Picard>(slot->problem, make_picard_options(slot->config));
    slot->report = slot->picard->run();
  }
  return *slot;
}

std::shared_ptr<const BumpMaxwellian> smooth_bump() {
  return std::make_shared<BumpMaxwellian>(1.0, Vec3{0.0, 0.0, 0.6}, 0.4, Vec3{0.3, -0.2, 0.1}, 0.5);
}

// smooth frozen field used where a criterion asks for "any" context
AnalyticField smooth_field() {
  return AnalyticField([](double t, const Vec3& x) {
    FieldSample s;
    s.E = {0.1 * std::sin(x[1] + t), 0.08 * std::cos(x[0]), 0.1 * std::sin(x[0] + 0.5 * x[2])};
    s.B = {0.05 * std::cos(x[2]), 0.06 * std::sin(x[0] - t), 0.04 * std::cos(x[1])};
    return s;
  });
}

Result c01_free_streaming() {
  auto f0 = smooth_bump();
  KineticSolution ks(std::make_shared<ZeroField>(), Environment{}, BoundaryClosure::make_inflow(nullptr), f0);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ux(-0.8, 0.8), uz(0.0, 1.2), uv(-3.0, 3.0), ut(0.0, 0.5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = ut(rng);
    const Vec3 x{ux(rng), ux(rng), uz(rng)}, v{uv(rng), uv(rng), uv(rng)};
    const double expect = f0->value(x - t * rel_velocity(v), v);
    worst = std::fmax(worst, std::fabs(ks.value(t, x, v) - expect));
  }
  return {worst <= kFreeStreamTol, fmt("max |f - f0(x - t vhat, v)| = %.2e over 1000 probes (tol %.0e)", worst, kFreeStreamTol)};
}

Result c02_alpha_wall() {
  const AnalyticField f = smooth_field();
  WeightContext ctx;
  ctx.fields = &f;
  ctx.env.g = 1.0;
  ctx.env.Ee = 0.1;
  ctx.env.Be = 0.3;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uv(-10.0, 10.0), ut(0.0, 0.5);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Vec3 v{uv(rng), uv(rng), uv(rng)};
    const double a = alpha(ut(rng), {ux(rng), ux(rng), 0.0}, v, ctx);
    worst = std::fmax(worst, std::fabs(a - std::fabs(rel_velocity(v)[2])));
  }
  return {worst <= kAlphaWallTol, fmt("max |alpha - |vhat3|| = %.2e over 1e4 wall samples (tol %.0e)", worst, kAlphaWallTol)};
}

Result c03_alpha_integral() {
  ZeroField zero;
  WeightContext ctx;
  ctx.fields = &zero;
  ctx.env.g = 1.0;
  bool ok = true;
  double worst = 0.0;
  std::string where;
  for (double x3 : {0.01, 0.1, 1.0})
    for (double M : {1.0, 4.0}) {
      const AlphaIntegral a = alpha_ball_integral(x3, M, ctx, 0.0, 0.0, 0.0, 1e-3, 10);
      const double ratio = a.value / (a.bound * kAlphaBoundSlack);
      if (ratio > worst) {
        worst = ratio;
        where = fmt("x3=%g M=%g", x3, M);
      }
      ok = ok && ratio <= 1.0;
    }
  return {ok, fmt("max integral / (1.01 x 4 M^3 ln(1 + 1/x3)) = %.4f at %s (g = 1, zero fields)", worst, where.c_str())};
}

Result c04_velocity_lemma() {
  const AnalyticField f = smooth_field();
  WeightContext ctx;
  ctx.fields = &f;
  ctx.env.g = 1.0;
  ctx.env.Be = 0.2;
  const double T = 0.5;
  const PrReport pr = measure_margin(ctx, 2.0, T, 4.0, 4096);
  // C1 = sup(|E| + |B| + |E3|_W1 + |B1|_W1 + |B2|_W1) + Ee + g, sampled on a grid of the region
  double c1 = 0.0;
  const double h = 1e-5;
  for (int it = 0; it <= 4; ++it)
    for (int i = 0; i <= 8; ++i)
      for (int j = 0; j <= 8; ++j)
        for (int k = 0; k <= 8; ++k) {
          const double t = T * it / 4.0;
          const Vec3 x{-2.0 + 0.5 * i, -2.0 + 0.5 * j, 0.25 * k};
          const FieldSample s = f.at(t, x);
          double w1[3] = {std::fabs(s.E[2]), std::fabs(s.B[0]), std::fabs(s.B[1])};
          for (int c = 0; c < 4; ++c) {
            Vec3 a = x, b = x;
            double ta = t, tb = t;
            if (c < 3) {
              a[c] += h;
              b[c] -= h;
            } else {
              ta += h;
              tb -= h;
            }
            const FieldSample p = f.at(ta, a), m = f.at(tb, b);
            w1[0] = std::fmax(w1[0], std::fabs(p.E[2] - m.E[2]) / (2 * h));
            w1[1] = std::fmax(w1[1], std::fabs(p.B[0] - m.B[0]) / (2 * h));
            w1[2] = std::fmax(w1[2], std::fabs(p.B[1] - m.B[1]) / (2 * h));
          }
          c1 = std::fmax(c1, sup_norm(s.E) + sup_norm(s.B) + w1[0] + w1[1] + w1[2]);
        }
  c1 += ctx.env.Ee + ctx.env.g;
  const double bound = kVelocityLemmaC * (c1 + ctx.env.Be) / ctx.c0;

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uz(0.02, 0.6), uv(-2.0, 2.0);
  OdeOptions o;
  o.max_dt = 1e-3;
  double worst = 0.0;
  int used = 0;
  for (int n = 0; n < 100; ++n) {
    const Vec3 x{ux(rng), ux(rng), uz(rng)}, v{uv(rng), uv(rng), uv(rng)};
    Trajectory tr = trace(T, x, v, 0.0, f, ctx.env, o);
    std::size_t keep = 0;
    while (keep < tr.size() && tr[keep].x[2] >= 0.0) ++keep;
    tr.resize(keep);
    if (tr.size() < 2) continue;
    const VelocityLemmaReport r = velocity_lemma_audit(tr, ctx);
    if (r.degenerate) continue;
    worst = std::fmax(worst, r.max_local_slope);
    ++used;
  }
  const bool ok = pr.margin >= kVelocityLemmaMinMargin && used >= 90 && worst <= bound;
  return {ok, fmt("max |d log alpha/ds| = %.3f <= 20 (C1 + Be) / c0 = %.3f (C1 = %.3f, c0 = %.3f, %d trajectories)",
                  worst, bound, c1, ctx.c0, used)};
}

Result c05_kernel_bounds() {
  const KernelBoundReport r = kernel_bound_audit(100000, 505);
  return {r.violations == 0 && r.samples == 100000,
          fmt("%zu violations in %zu samples (worst lhs/rhs %.4f, %s)", r.violations, r.samples, r.worst_ratio,
              r.worst_check)};
}

Result c06_neumann_closed_form() {
  const double rho0 = 0.37;
  auto rho = [rho0](double, double, double) { return rho0; };
  double worst = 0.0;
  for (auto [t, x3] : {std::pair{0.5, 0.1}, std::pair{1.0, 0.5}}) {
    const double got = neumann_boundary_term(t, {0.2, -0.1, x3}, rho);
    const double expect = -4.0 * std::numbers::pi * rho0 * (t - x3);
    worst = std::fmax(worst, std::fabs(got - expect) / std::fabs(expect));
  }
  return {worst <= kNeumannClosedTol, fmt("max relative error %.2e (tol %.0e)", worst, kNeumannClosedTol)};
}

// Relative L2 errors (E, B) of the field representation against a Yee solve at t = T.
std::pair<double, double> gs_vs_fdtd(double h, int quad_refinements) {
  const double T = 0.3, g = 1.0;
  auto f0 = std::make_shared<BumpMaxwellian>(0.05, Vec3{0.1, 0.0, 0.3}, 0.3, Vec3{0.2, 0.1, -0.4}, 0.3);
  auto init = std::make_shared<SumInitialFields>(std::vector<std::shared_ptr<const InitialFieldData>>{
      std::make_shared<CoulombImageField>(0.05, Vec3{0.1, 0.0, 0.3}, 0.3),
      std::make_shared<CurlFields>(0.02, Vec3{0.0, 0.2, 0.4}, 0.25, 0.02, Vec3{-0.1, 0.0, 0.3}, 0.25)});
  // density known in closed form: free fall with an absorbing wall
  oracle::FreeFallDensity ff(f0, g);
  const VelocityGrid vg = VelocityGrid::make(1.8, 12);
  GsOptions opt;
  for (int i = 0; i < quad_refinements; ++i) opt.q = opt.q.refined();
  GsSolver gs(init, f0, vg, opt);
  Environment env;
  env.g = g;
  ZeroField zf;
  SourceModel src{&ff, &zf, env};

  oracle::YeePec yee(1.6, 1.8, h);
  const int n = static_cast<int>(std::ceil(T / (0.4 * h)));
  yee.initialize([&](const Vec3& x) { return init->at(x); }, T / n);
  yee.advance_to(
      T,
      [&](double t, const Vec3& x) {
        Vec3 J;
        for (std::size_t a = 0; a < vg.size(); ++a) {
          const double f = ff.value(t, x, vg.v[a]);
          if (f != 0.0) J += (vg.w[a] * f) * vg.vhat[a];
        }
        return J;
      },
      ff.support(T));

  std::vector<Vec3> pts;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) pts.push_back({-0.5 + 0.25 * i, -0.5 + 0.25 * j, 0.05 + 0.2 * k});
  std::vector<FieldSample> rep(pts.size());
  parallel_for(pts.size(), 0, [&](std::size_t p) { rep[p] = gs.eval(T, pts[p], src); });
  double nE = 0, dE = 0, nB = 0, dB = 0;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const FieldSample b = yee.at(pts[p]);
    nE += norm2(rep[p].E - b.E);
    dE += norm2(b.E);
    nB += norm2(rep[p].B - b.B);
    dB += norm2(b.B);
  }
  return {std::sqrt(nE / dE), std::sqrt(nB / dB)};
}

Result c07_fdtd() {
  const auto [e1, b1] = gs_vs_fdtd(0.06, 0);
  const auto [e2, b2] = gs_vs_fdtd(0.04, 1);
  const bool ok = e2 <= kFdtdTol && b2 <= kFdtdTol && e2 < e1 && b2 < b1;
  return {ok, fmt("rel L2 E %.4f -> %.4f, B %.4f -> %.4f under joint refinement (h 0.06 -> 0.04, quadrature x2; tol %.2f)",
                  e1, e2, b1, b2, kFdtdTol)};
}

std::vector<Vec3> wall_ring(double r, int n) {
  std::vector<Vec3> w;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    w.push_back({r * std::cos(a), r * std::sin(a), 0.0});
  }
  return w;
}

Result c08_conductor() {
  ConvergedRun& run = converged("specular-billiard");
  const SourceModel src = run.source();
  const double T = run.config.time.T;
  std::vector<Vec3> wall = wall_ring(0.15, 4);
  wall.push_back({0.0, 0.0, 0.0});
  const AuditReport d = dirichlet_audit(run.picard->solver(), src, T, wall, kDirichletFactor);
  const AuditReport n = neumann_refinement(run.picard->solver(), src, run.picard->velocity_grid(), T, wall, 0.04,
                                           kNeumannLo, kNeumannHi);
  const bool ok = run.report.converged && d.pass && n.pass;
  return {ok, fmt("wall sup |E1|,|E2|,|B3| = %.2e <= 10 x quadrature scale %.2e; Neumann defect %.3e -> %.3e, ratio %.3f in [%.2f, %.2f]",
                  d.residual, d.value("quadrature_scale"), n.at_h, n.at_h2, n.residual, kNeumannLo, kNeumannHi)};
}

Result c09_gauss_b() {
  ConvergedRun& run = converged("specular-billiard");
  const SourceModel src = run.source();
  const std::vector<Vec3> pts = {{0.0, 0.0, 0.3}, {0.15, -0.1, 0.4}, {-0.1, 0.15, 0.25}, {0.05, 0.05, 0.55}};
  const AuditReport r = gauss_B_refinement(run.picard->solver(), src, run.config.time.T, pts, 0.1, kGaussBOrder);
  return {run.report.converged && r.pass,
          fmt("rms div B %.3e (h = 0.1) -> %.3e (h = 0.05), observed order %.2f (min %.1f)", r.at_h, r.at_h2, r.residual,
              kGaussBOrder)};
}

ConvergenceReport contraction_run(double T) {
  RunConfig c = preset_config("specular-billiard");
  c.name = "contraction";
  c.bc.kind = "inflow";
  c.bc.preset = "zero";
  c.init.f0_params["grazing_beta"] = 0.0;
  c.time.T = T;
  c.picard.tol = 1e-9;
  c.picard.max_iter = 4;
  c.picard.require_pr = false;
  validate(c);
  Picard p(make_problem(c), make_picard_options(c));
  return p.run();
}

Result c10_contraction() {
  const ConvergenceReport a = contraction_run(0.1);
  const ConvergenceReport b = contraction_run(0.05);
  const double ra = a.max_ratio(), rb = b.max_ratio();
  const bool ok = std::isfinite(ra) && std::isfinite(rb) && ra < 1.0 && rb < 1.0 && rb < ra;
  return {ok, fmt("max sweep ratio %.3e at T = 0.1 (%d sweeps), %.3e at T = 0.05 (%d sweeps)", ra, a.iterations, rb,
                  b.iterations)};
}

Result c11_specular() {
  ZeroField zero;
  Environment env;
  env.g = 1.0;
  OdeOptions o;
  o.max_dt = 5e-4;
  o.tol_exit = 1e-14;
  const Vec3 x0{0.0, 0.0, 0.2}, v0{0.3, -0.2, 0.5};
  // enough time for ten bounces backward; gravity makes the billiard a bouncing ball
  const SpecularResult r = specular_flow(20.0, x0, v0, 0.0, zero, env, o, 10);
  auto same_bits = [](double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; };
  bool bits = true;
  for (const Bounce& b : r.cycles.bounces)
    bits = bits && same_bits(b.v_out[0], b.v_in[0]) && same_bits(b.v_out[1], b.v_in[1]) &&
           same_bits(b.v_out[2], -b.v_in[2]);
  // the speed at every wall contact equals the one fixed by energy conservation
  const double e0 = jbracket(v0) + env.g * x0[2];
  const double speed = std::sqrt(e0 * e0 - 1.0);
  double drift = 0.0;
  for (const Bounce& b : r.cycles.bounces) drift = std::fmax(drift, std::fabs(norm(b.v_in) - speed));
  const bool ok = r.cycles.count() == 10 && bits && drift <= kSpeedDriftTol;
  return {ok, fmt("%zu bounces, bitwise reflection %s, max | |V| - |V|_exact | = %.2e (tol %.0e)", r.cycles.count(),
                  bits ? "yes" : "no", drift, kSpeedDriftTol)};
}

Result c12_diffuse() {
  // c_mu from plain Monte Carlo over the Maxwellian
  std::mt19937_64 rng(1212);
  std::normal_distribution<double> n01;
  const int N = 100000;
  double s = 0.0;
  for (int k = 0; k < N; ++k) {
    const Vec3 v{n01(rng), n01(rng), n01(rng)};
    if (v[2] > 0.0) s += rel_velocity(v)[2];
  }
  const double mc = c_mu() * s / N;
  const double cmu_err = std::fabs(mc - 1.0);

  ConvergedRun& run = converged("diffuse-relax");
  const IterationState& st = run.picard->state();
  const VelocityGrid& vg = run.picard->velocity_grid();
  std::vector<std::pair<double, double>> wp;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) wp.push_back({-0.19 + 0.183 * i, -0.17 + 0.177 * j});  // off the wall nodes
  const double T = run.config.time.T;
  double outflux = 0.0;
  for (const auto& [x1, x2] : wp) outflux = std::fmax(outflux, outgoing_wall_flux(*st.f, T, x1, x2, vg));
  const double lag = run.report.sweeps.back().rel;
  MassFluxOptions mo;
  mo.n_space = 8;
  mo.n_times = 5;
  mo.mass_tol = kMassDriftTol;
  mo.flux_tol = 2.0 * std::fmax(lag, run.config.picard.tol) * outflux + 1e-14;
  mo.pointwise_tol = closure_interpolation_error(st, vg);
  const AuditReport m = mass_flux_audit(*st.f, ClosureKind::Diffuse, vg, T, wp, mo);
  // on the nodes of the lagged flux table the closure has no interpolation error: strict tolerance
  std::vector<std::pair<double, double>> nodes;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) nodes.push_back({-0.2 + 0.2 * i, -0.2 + 0.2 * j});
  MassFluxOptions strict = mo;
  strict.pointwise_tol = {};
  strict.n_times = 4;
  const AuditReport n = mass_flux_audit(*st.f, ClosureKind::Diffuse, vg, T, nodes, strict);
  const bool ok = cmu_err <= kCmuTol && run.report.converged && m.pass && n.pass;
  return {ok, fmt("MC c_mu normalization error %.2e (N = 1e5); wall flux on table nodes %.2e <= %.2e; off nodes %.2e <= "
                  "%.2e lag + %.2e closure interpolation; mass drift %.2e (tol %.0e)",
                  cmu_err, n.residual, n.tolerance, m.residual, m.value("flux_tol"), m.value("pointwise_tol_sup"),
                  m.value("mass_drift"), kMassDriftTol)};
}

Result c13_energy() {
  ConvergedRun& run = converged("specular-billiard");
  const IterationState& st = run.picard->state();
  const EnergySeries es = energy_series(*st.fields, *st.f, run.picard->velocity_grid(), 8, 0);
  const AuditReport r = energy_balance(es, run.problem.env, kEnergyTol, true);
  return {run.report.converged && r.pass,
          fmt("relative defect %.3e (tol %.2f); field-only defect %.3e", r.residual, kEnergyTol,
              r.value("field_relative_defect"))};
}

Result c14_gamma0() {
  ConvergedRun& run = converged("inflow-gaussian");
  const IterationState& st = run.picard->state();
  WeightContext ctx;
  ctx.fields = st.transport.get();
  ctx.env = run.problem.env;
  const double T = run.config.time.T;
  // Probes must lie in the layer fed by the wall within T (t_b < T); above it f is the
  // initial bump transported from t = 0 and carries no wall singularity.
  const Vec3 v{0.1, 0.0, 0.005};
  const AuditReport r =
      gamma0_approach(*st.f, T, 0.0, 0.0, v, {2e-3, 2e-4, 2e-5}, ctx, kGammaGrowth, kGammaSpread);
  return {run.report.converged && r.pass,
          fmt("|d_x3 f| grows %.2fx from x3 = 2e-3 to 2e-5 (min %.0f); weighted spread %.3f (max %.0f)",
              r.value("growth"), kGammaGrowth, r.value("spread"), kGammaSpread)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "free-streaming oracle", c01_free_streaming},
      {2, "alpha wall identity", c02_alpha_wall},
      {3, "alpha integral bound", c03_alpha_integral},
      {4, "velocity lemma", c04_velocity_lemma},
      {5, "kernel bounds", c05_kernel_bounds},
      {6, "Neumann closed form", c06_neumann_closed_form},
      {7, "field representation vs FDTD", c07_fdtd},
      {8, "conductor boundary conditions", c08_conductor},
      {9, "Gauss-B refinement order", c09_gauss_b},
      {10, "Picard contraction", c10_contraction},
      {11, "specular exactness", c11_specular},
      {12, "diffuse flux and mass", c12_diffuse},
      {13, "energy identity", c13_energy},
      {14, "gamma0 singularity structure", c14_gamma0},
  };
  std::vector<int> want;
  for (int i = 1; i < argc; ++i) want.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const Criterion& c : all) {
    if (!want.empty() && std::find(want.begin(), want.end(), c.id) == want.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %-32s %s [%.1f s]\n", c.id, r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str(), secs);
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
