#include "hsvm/picard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsvm/kinetic_weight.hpp"
#include "hsvm/parallel.hpp"
#include "hsvm/quadrature.hpp"

namespace hsvm {

double ConvergenceReport::contraction() const {
  double s = 0.0;
  int n = 0;
  for (const auto& r : sweeps)
    if (std::isfinite(r.ratio) && r.ratio > 0.0) {
      s += std::log(r.ratio);
      ++n;
    }
  return n > 0 ? std::exp(s / n) : std::numeric_limits<double>::quiet_NaN();
}

double ConvergenceReport::max_ratio() const {
  double m = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : sweeps)
    if (std::isfinite(r.ratio)) m = std::isfinite(m) ? std::fmax(m, r.ratio) : r.ratio;
  return m;
}

std::vector<ProbePoint> make_probes(const Box& box, double T, double vmax, std::size_t n) {
  std::vector<ProbePoint> out;
  out.reserve(n);
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17};
  for (std::size_t k = 1; k <= n; ++k) {
    double u[7];
    for (int d = 0; d < 7; ++d) u[d] = radical_inverse(k, primes[d]);
    ProbePoint p;
    p.t = u[0] * T;
    for (int i = 0; i < 3; ++i) p.x[i] = box.lo[i] + u[1 + i] * (box.hi[i] - box.lo[i]);
    // uniform in the velocity ball
    const double r = vmax * std::cbrt(u[4]);
    const double mu = 2.0 * u[5] - 1.0;
    const double phi = 2.0 * std::numbers::pi * u[6];
    const double st = std::sqrt(1.0 - mu * mu);
    p.v = r * Vec3{st * std::cos(phi), st * std::sin(phi), mu};
    out.push_back(p);
  }
  return out;
}

Picard::Picard(Problem problem, PicardOptions opt) : problem_(std::move(problem)), opt_(std::move(opt)) {
  problem_.env.validate();
  opt_.grid.validate();
  if (opt_.max_iter < 1) throw ConfigError("picard.max_iter must be at least 1");
  if (!(opt_.tol > 0.0)) throw ConfigError("picard.tol must be positive");
  if (!problem_.f0) problem_.f0 = std::make_shared<ZeroDensity>();
  if (!problem_.init) problem_.init = std::make_shared<ZeroInitialFields>();
  solver_ = std::make_shared<GsSolver>(problem_.init, problem_.f0,
                                       VelocityGrid::make(opt_.vmax, opt_.nv, problem_.env.delta), opt_.gs);
  if (problem_.closure.kind == ClosureKind::Diffuse) {
    // normalized on the moment quadrature, so re-emission balances the discrete outgoing flux exactly
    const VelocityGrid& vg = solver_->velocity_grid();
    double s = 0.0;
    for (std::size_t a = 0; a < vg.size(); ++a)
      if (vg.v[a][2] > 0.0) s += vg.w[a] * maxwellian_mu(vg.v[a]) * vg.vhat[a][2];
    problem_.closure.cmu = s > 0.0 ? 1.0 / s : c_mu();
  }

  const GridSpec& g = opt_.grid;
  Box domain{{-g.Lx, -g.Lx, 0.0}, {g.Lx, g.Lx, g.Lz}};
  // probes where the density can live, clipped to the grid
  KineticSolution probe_support(nullptr, problem_.env, problem_.closure, problem_.f0);
  Box sup = probe_support.support(g.T);
  Box pb = domain;
  if (!sup.empty())
    for (int i = 0; i < 3; ++i) {
      pb.lo[i] = std::fmax(pb.lo[i], sup.lo[i]);
      pb.hi[i] = std::fmin(pb.hi[i], sup.hi[i]);
    }
  if (pb.empty()) pb = domain;
  probes_ = make_probes(pb, g.T, opt_.vmax, opt_.n_probes);

  // iterate 0: f0 frozen in time, E0 and B0 on every level
  StaticInitialField e0(problem_.init);
  auto f0_fields = std::make_shared<const FieldState>(sample_field(g, e0));
  init_state_.ell = 0;
  init_state_.fields_prev = f0_fields;
  init_state_.fields = f0_fields;
  init_state_.f = std::make_shared<StaticDensity>(problem_.f0);
  init_state_.transport = std::make_shared<GridFieldEvaluator>(f0_fields);
  init_state_.hist = std::make_shared<const SourceHistory>(
      tabulate_sources(*init_state_.f, g, solver_->velocity_grid(), opt_.threads));
  state_ = init_state_;
}

IterationState Picard::iterate_once(const IterationState& s) const {
  const GridSpec& g = opt_.grid;
  IterationState n;
  n.ell = s.ell + 1;
  n.fields_prev = s.fields;
  n.f_prev = s.f;
  n.transport = std::make_shared<GridFieldEvaluator>(s.fields);
  auto f = std::make_shared<KineticSolution>(n.transport, problem_.env, problem_.closure, problem_.f0, opt_.ode,
                                             opt_.eval);
  if (problem_.closure.kind == ClosureKind::Specular) {
    f->set_lagged_specular(s.f);
  } else if (problem_.closure.kind == ClosureKind::Diffuse) {
    GridSpec wall = g;
    const int r = std::max(1, opt_.wall_refine);
    wall.nx = r * (g.nx - 1) + 1;
    wall.ny = r * (g.ny - 1) + 1;
    wall.n_levels = r * (g.n_levels - 1) + 1;
    auto table = std::make_shared<const WallFluxTable>(
        WallFluxTable::tabulate(*s.f, wall, solver_->velocity_grid(), opt_.threads));
    f->set_lagged_diffuse([table](double t, double x1, double x2) { return table->at(t, x1, x2); });
    n.wall_flux = table;
  }
  n.f = f;
  n.hist = std::make_shared<const SourceHistory>(tabulate_sources(*f, g, solver_->velocity_grid(), opt_.threads));
  SourceModel src{f.get(), n.transport.get(), problem_.env};
  n.fields = std::make_shared<const FieldState>(tabulate_fields(*solver_, src, g, opt_.threads));
  return n;
}

SweepRecord Picard::compare(const IterationState& next, const IterationState& prev) const {
  SweepRecord r;
  r.iter = next.ell;
  r.dE_sup = FieldState::sup_diff_E(*next.fields, *prev.fields);
  r.dB_sup = FieldState::sup_diff_B(*next.fields, *prev.fields);
  r.E_sup = next.fields->sup_E();
  r.B_sup = next.fields->sup_B();
  std::vector<double> df(probes_.size()), fs(probes_.size());
  const double p = 4.0 + problem_.env.delta;
  parallel_for(probes_.size(), opt_.threads, [&](std::size_t k) {
    const ProbePoint& q = probes_[k];
    const double a = next.f->value(q.t, q.x, q.v);
    const double b = prev.f->value(q.t, q.x, q.v);
    const double w = std::pow(jbracket(q.v), p);
    df[k] = w * std::fabs(a - b);
    fs[k] = w * std::fabs(a);
  });
  for (std::size_t k = 0; k < probes_.size(); ++k) {
    r.df_probe_sup = std::fmax(r.df_probe_sup, df[k]);
    r.f_probe_sup = std::fmax(r.f_probe_sup, fs[k]);
  }
  auto relative = [](double d, double scale) { return d == 0.0 ? 0.0 : d / std::fmax(scale, 1e-300); };
  const double field_scale = std::fmax(r.E_sup, r.B_sup);
  r.rel = std::fmax(std::fmax(relative(r.dE_sup, field_scale), relative(r.dB_sup, field_scale)),
                    relative(r.df_probe_sup, r.f_probe_sup));
  if (auto* ks = dynamic_cast<const KineticSolution*>(next.f.get())) {
    r.grazing = ks->grazing_count();
    r.truncated = ks->truncation_count();
  }
  return r;
}

ConvergenceReport Picard::run(const SweepCallback& on_sweep) {
  ConvergenceReport rep;
  {
    WeightContext ctx;
    auto tr = std::make_shared<GridFieldEvaluator>(init_state_.fields);
    ctx.fields = tr.get();
    ctx.env = problem_.env;
    const PrReport pr = measure_margin(ctx, opt_.grid.Lx, opt_.grid.T, opt_.vmax, 1024);
    rep.pr_margin = pr.margin;
    if (opt_.require_pr && !pr.ok)
      throw SignConditionError("sign condition fails for the initial data: margin " + std::to_string(pr.margin));
  }
  state_ = init_state_;
  int above_one = 0;
  double last_rel = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= opt_.max_iter; ++it) {
    IterationState next = iterate_once(state_);
    SweepRecord r = compare(next, state_);
    if (it >= 2 && std::isfinite(last_rel) && last_rel > 0.0) r.ratio = r.rel / last_rel;
    last_rel = r.rel;
    rep.sweeps.push_back(r);
    rep.iterations = it;
    state_ = std::move(next);
    if (on_sweep) on_sweep(r, state_);
    if (r.rel < opt_.tol) {
      rep.converged = true;
      rep.stop_reason = "tolerance";
      return rep;
    }
    above_one = (std::isfinite(r.ratio) && r.ratio > 1.0) ? above_one + 1 : 0;
    if (above_one >= 3) {
      rep.stop_reason = "diverged";
      throw DivergenceError("iteration diverged (ratio > 1 for 3 consecutive sweeps); reduce T", rep);
    }
  }
  rep.stop_reason = "max_iter";
  return rep;
}

}  // namespace hsvm
