#include "hsvm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsvm/parallel.hpp"
#include "hsvm/quadrature.hpp"

namespace hsvm {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

double sup3(const Vec3& a) { return std::fmax(std::fabs(a[0]), std::fmax(std::fabs(a[1]), std::fabs(a[2]))); }

std::shared_ptr<const FieldState> borrow(const FieldState& s) {
  return std::shared_ptr<const FieldState>(&s, [](const FieldState*) {});
}

double rms(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return a.empty() ? 0.0 : std::sqrt(s / a.size());
}

}  // namespace

double AuditReport::value(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

std::array<AuditReport, 4> maxwell_residuals(const FieldState& fields, const SourceHistory& hist, double rel_tol) {
  const GridSpec& g = fields.grid();
  std::array<AuditReport, 4> out;
  out[0].name = "maxwell_ampere";
  out[1].name = "maxwell_faraday";
  out[2].name = "maxwell_gauss_E";
  out[3].name = "maxwell_gauss_B";
  double res[4] = {0, 0, 0, 0}, scale[4] = {0, 0, 0, 0}, sq[4] = {0, 0, 0, 0};
  std::size_t count = 0;
  if (g.n_levels >= 3 && g.nx >= 3 && g.ny >= 3 && g.nz >= 3) {
    const double hx = g.hx(), hy = g.hy(), hz = g.hz(), dt = g.dt();
    for (int n = 1; n + 1 < g.n_levels; ++n)
      for (int i = 1; i + 1 < g.nx; ++i)
        for (int j = 1; j + 1 < g.ny; ++j)
          for (int k = 1; k + 1 < g.nz; ++k) {
            auto F = [&](int l, int a, int b, int c) { return fields.get(l, g.index(a, b, c)); };
            const FieldSample xp = F(n, i + 1, j, k), xm = F(n, i - 1, j, k);
            const FieldSample yp = F(n, i, j + 1, k), ym = F(n, i, j - 1, k);
            const FieldSample zp = F(n, i, j, k + 1), zm = F(n, i, j, k - 1);
            const FieldSample tp = F(n + 1, i, j, k), tm = F(n - 1, i, j, k);
            auto d = [](const Vec3& p, const Vec3& m, int c, double h) { return (p[c] - m[c]) / (2 * h); };
            const Vec3 curlB{d(yp.B, ym.B, 2, hy) - d(zp.B, zm.B, 1, hz), d(zp.B, zm.B, 0, hz) - d(xp.B, xm.B, 2, hx),
                             d(xp.B, xm.B, 1, hx) - d(yp.B, ym.B, 0, hy)};
            const Vec3 curlE{d(yp.E, ym.E, 2, hy) - d(zp.E, zm.E, 1, hz), d(zp.E, zm.E, 0, hz) - d(xp.E, xm.E, 2, hx),
                             d(xp.E, xm.E, 1, hx) - d(yp.E, ym.E, 0, hy)};
            const Vec3 dtE = (1.0 / (2 * dt)) * (tp.E - tm.E);
            const Vec3 dtB = (1.0 / (2 * dt)) * (tp.B - tm.B);
            const Moments m = hist.get(n, g.index(i, j, k));
            const double divE = d(xp.E, xm.E, 0, hx) + d(yp.E, ym.E, 1, hy) + d(zp.E, zm.E, 2, hz);
            const double divB = d(xp.B, xm.B, 0, hx) + d(yp.B, ym.B, 1, hy) + d(zp.B, zm.B, 2, hz);
            const double r[4] = {sup3(dtE - curlB + kFourPi * m.J), sup3(dtB + curlE), std::fabs(divE - kFourPi * m.rho),
                                 std::fabs(divB)};
            const double s[4] = {sup3(dtE) + sup3(curlB) + kFourPi * sup3(m.J), sup3(dtB) + sup3(curlE),
                                 std::fabs(d(xp.E, xm.E, 0, hx)) + std::fabs(d(yp.E, ym.E, 1, hy)) +
                                     std::fabs(d(zp.E, zm.E, 2, hz)) + kFourPi * std::fabs(m.rho),
                                 std::fabs(d(xp.B, xm.B, 0, hx)) + std::fabs(d(yp.B, ym.B, 1, hy)) +
                                     std::fabs(d(zp.B, zm.B, 2, hz))};
            for (int q = 0; q < 4; ++q) {
              res[q] = std::fmax(res[q], r[q]);
              scale[q] = std::fmax(scale[q], s[q]);
              sq[q] += r[q] * r[q];
            }
            ++count;
          }
  }
  for (int q = 0; q < 4; ++q) {
    out[q].residual = res[q];
    out[q].tolerance = rel_tol * scale[q];
    out[q].pass = res[q] <= out[q].tolerance;
    out[q].values = {{"sup", res[q]}, {"rms", count ? std::sqrt(sq[q] / count) : 0.0}, {"scale", scale[q]}};
  }
  return out;
}

AuditReport conductor_bc_residuals(const FieldState& fields, const SourceHistory& hist, double dirichlet_tol) {
  const GridSpec& g = fields.grid();
  AuditReport r;
  r.name = "conductor_bc";
  double e1 = 0, e2 = 0, b3 = 0, n1[3] = {0, 0, 0}, n2[3] = {0, 0, 0};
  const double hz = g.hz();
  for (int n = 0; n < g.n_levels; ++n)
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const FieldSample f0 = fields.get(n, g.index(i, j, 0));
        e1 = std::fmax(e1, std::fabs(f0.E[0]));
        e2 = std::fmax(e2, std::fabs(f0.E[1]));
        b3 = std::fmax(b3, std::fabs(f0.B[2]));
        if (g.nz < 3) continue;
        const FieldSample f1 = fields.get(n, g.index(i, j, 1)), f2 = fields.get(n, g.index(i, j, 2));
        const Moments m = hist.get(n, g.index(i, j, 0));
        // defects of d3 E3 = 4 pi rho, d3 B1 = 4 pi J2, d3 B2 = -4 pi J1
        const double a0[3] = {f0.E[2], f0.B[0], f0.B[1]}, a1[3] = {f1.E[2], f1.B[0], f1.B[1]},
                     a2[3] = {f2.E[2], f2.B[0], f2.B[1]};
        const double rhs[3] = {kFourPi * m.rho, kFourPi * m.J[1], -kFourPi * m.J[0]};
        for (int q = 0; q < 3; ++q) {
          n2[q] = std::fmax(n2[q], std::fabs((-3 * a0[q] + 4 * a1[q] - a2[q]) / (2 * hz) - rhs[q]));
          n1[q] = std::fmax(n1[q], std::fabs((a1[q] - a0[q]) / hz - rhs[q]));
        }
      }
  r.residual = std::fmax(e1, std::fmax(e2, b3));
  r.tolerance = dirichlet_tol;
  r.pass = r.residual <= dirichlet_tol;
  r.values = {{"E1_sup", e1},          {"E2_sup", e2},          {"B3_sup", b3},
              {"neumann_E3_o2", n2[0]}, {"neumann_B1_o2", n2[1]}, {"neumann_B2_o2", n2[2]},
              {"neumann_E3_o1", n1[0]}, {"neumann_B1_o1", n1[1]}, {"neumann_B2_o1", n1[2]}};
  return r;
}

double quadrature_error_scale(const GsSolver& solver, const SourceModel& src, double t, const std::vector<Vec3>& points) {
  const GsSolver fine = solver.with_quadrature(solver.options().q.refined());
  double s = 0.0;
  for (const Vec3& p : points) {
    const FieldSample a = solver.eval(t, p, src), b = fine.eval(t, p, src);
    s = std::fmax(s, std::fmax(sup3(a.E - b.E), sup3(a.B - b.B)));
  }
  return s;
}

AuditReport dirichlet_audit(const GsSolver& solver, const SourceModel& src, double t,
                            const std::vector<Vec3>& wall_points, double factor) {
  AuditReport r;
  r.name = "dirichlet_wall";
  double e1 = 0, e2 = 0, b3 = 0;
  for (const Vec3& p : wall_points) {
    const FieldSample s = solver.eval(t, {p[0], p[1], 0.0}, src);
    e1 = std::fmax(e1, std::fabs(s.E[0]));
    e2 = std::fmax(e2, std::fabs(s.E[1]));
    b3 = std::fmax(b3, std::fabs(s.B[2]));
  }
  std::vector<Vec3> near;
  for (const Vec3& p : wall_points) near.push_back({p[0], p[1], 0.0});
  const double qscale = quadrature_error_scale(solver, src, t, near);
  r.residual = std::fmax(e1, std::fmax(e2, b3));
  r.tolerance = factor * qscale;
  r.pass = r.residual <= r.tolerance;
  r.values = {{"E1_sup", e1}, {"E2_sup", e2}, {"B3_sup", b3}, {"quadrature_scale", qscale}};
  return r;
}

AuditReport neumann_refinement(const GsSolver& solver, const SourceModel& src, const VelocityGrid& vg, double t,
                               const std::vector<Vec3>& wall_points, double h, double lo, double hi) {
  AuditReport r;
  r.name = "neumann_refinement";
  std::vector<double> dh, dh2;
  for (const Vec3& p : wall_points) {
    const Vec3 w{p[0], p[1], 0.0};
    const double rho = compute_moments(*src.f, t, w, vg).rho;
    const double e0 = solver.eval(t, w, src).E[2];
    const double e1 = solver.eval(t, {w[0], w[1], h}, src).E[2];
    const double e2 = solver.eval(t, {w[0], w[1], 0.5 * h}, src).E[2];
    dh.push_back((e1 - e0) / h - kFourPi * rho);
    dh2.push_back((e2 - e0) / (0.5 * h) - kFourPi * rho);
  }
  r.at_h = rms(dh);
  r.at_h2 = rms(dh2);
  const double ratio = r.at_h > 0.0 ? r.at_h2 / r.at_h : 0.0;
  r.residual = ratio;
  r.tolerance = hi;
  r.pass = ratio >= lo && ratio <= hi;
  r.values = {{"defect_h", r.at_h}, {"defect_h2", r.at_h2}, {"ratio", ratio}, {"h", h}};
  return r;
}

AuditReport gauss_B_refinement(const GsSolver& solver, const SourceModel& src, double t,
                               const std::vector<Vec3>& points, double h, double min_order) {
  AuditReport r;
  r.name = "gauss_B_refinement";
  auto divB = [&](const Vec3& p, double s) {
    double d = 0.0;
    for (int c = 0; c < 3; ++c) {
      Vec3 a = p, b = p;
      a[c] += s;
      b[c] -= s;
      d += (solver.eval(t, a, src).B[c] - solver.eval(t, b, src).B[c]) / (2 * s);
    }
    return d;
  };
  std::vector<double> dh, dh2;
  for (const Vec3& p : points) {
    dh.push_back(divB(p, h));
    dh2.push_back(divB(p, 0.5 * h));
  }
  r.at_h = rms(dh);
  r.at_h2 = rms(dh2);
  const double order = (r.at_h > 0.0 && r.at_h2 > 0.0) ? std::log2(r.at_h / r.at_h2) : 0.0;
  r.residual = order;
  r.tolerance = min_order;
  r.pass = order >= min_order;
  r.values = {{"divB_h", r.at_h}, {"divB_h2", r.at_h2}, {"order", order}, {"h", h}};
  return r;
}

namespace {

struct KineticTotals {
  double kinetic = 0.0, JE = 0.0, J3 = 0.0, mass = 0.0;
};

KineticTotals kinetic_totals(const PhaseDensity& f, double t, const VelocityGrid& vg, const FieldEvaluator* E,
                             int n_space, int threads) {
  KineticTotals out;
  const Box b = f.support(t);
  if (b.empty()) return out;
  QuadRule q[3];
  for (int c = 0; c < 3; ++c) q[c] = gauss_legendre(n_space, b.lo[c], b.hi[c]);
  const std::size_t n = static_cast<std::size_t>(n_space) * n_space * n_space;
  std::vector<KineticTotals> part(n);
  parallel_for(n, threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx / (n_space * n_space)), j = static_cast<int>(idx / n_space % n_space),
              k = static_cast<int>(idx % n_space);
    const Vec3 x{q[0].x[i], q[1].x[j], q[2].x[k]};
    const double wx = q[0].w[i] * q[1].w[j] * q[2].w[k];
    double kin = 0.0, rho = 0.0;
    Vec3 J;
    for (std::size_t a = 0; a < vg.size(); ++a) {
      const double fv = f.value(t, x, vg.v[a]);
      if (fv == 0.0) continue;
      kin += vg.w[a] * vg.jv[a] * fv;
      rho += vg.w[a] * fv;
      J += (vg.w[a] * fv) * vg.vhat[a];
    }
    KineticTotals& p = part[idx];
    p.kinetic = wx * kin;
    p.mass = wx * rho;
    p.J3 = wx * J[2];
    if (E) p.JE = wx * dot(J, E->at(t, x).E);
  });
  for (const auto& p : part) {
    out.kinetic += p.kinetic;
    out.JE += p.JE;
    out.J3 += p.J3;
    out.mass += p.mass;
  }
  return out;
}

}  // namespace

EnergySeries energy_series(const FieldState& fields, const PhaseDensity& f, const VelocityGrid& vg, int n_space,
                           int threads) {
  const GridSpec& g = fields.grid();
  GridFieldEvaluator ev(borrow(fields));
  EnergySeries s;
  const double hx = g.hx(), hy = g.hy(), hz = g.hz();
  auto tw = [](int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
  for (int n = 0; n < g.n_levels; ++n) {
    double W = 0.0, P = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        for (int k = 0; k < g.nz; ++k) {
          const FieldSample F = fields.get(n, g.index(i, j, k));
          W += tw(i, g.nx) * tw(j, g.ny) * tw(k, g.nz) * 0.5 * (norm2(F.E) + norm2(F.B));
          const Vec3 S = cross(F.E, F.B);
          // outward normals of the faces x1 = -+Lx, x2 = -+Lx, x3 = Lz
          if (i == 0) P -= tw(j, g.ny) * tw(k, g.nz) * S[0] * hy * hz;
          if (i == g.nx - 1) P += tw(j, g.ny) * tw(k, g.nz) * S[0] * hy * hz;
          if (j == 0) P -= tw(i, g.nx) * tw(k, g.nz) * S[1] * hx * hz;
          if (j == g.ny - 1) P += tw(i, g.nx) * tw(k, g.nz) * S[1] * hx * hz;
          if (k == g.nz - 1) P += tw(i, g.nx) * tw(j, g.ny) * S[2] * hx * hy;
        }
    const double t = g.time(n);
    const KineticTotals kt = kinetic_totals(f, t, vg, &ev, n_space, threads);
    s.t.push_back(t);
    s.field.push_back(W * hx * hy * hz);
    s.poynting.push_back(P);
    s.kinetic.push_back(kt.kinetic);
    s.JE.push_back(kt.JE);
    s.J3.push_back(kt.J3);
  }
  return s;
}

AuditReport energy_balance(const EnergySeries& s, const Environment& env, double tol, bool thresholded) {
  AuditReport r;
  r.name = "energy_balance";
  r.thresholded = thresholded;
  double defect = 0.0, field_defect = 0.0, scale = 0.0, field_scale = 0.0;
  double rhs = 0.0, abs_rhs = 0.0, frhs = 0.0, abs_frhs = 0.0;
  for (std::size_t n = 1; n < s.t.size(); ++n) {
    const double dt = s.t[n] - s.t[n - 1];
    auto src = [&](std::size_t m) { return kFourPi * (env.Ee - env.g) * s.J3[m] - s.poynting[m]; };
    auto fsrc = [&](std::size_t m) { return -kFourPi * s.JE[m] - s.poynting[m]; };
    rhs += 0.5 * dt * (src(n) + src(n - 1));
    abs_rhs += 0.5 * dt * (std::fabs(src(n)) + std::fabs(src(n - 1)));
    frhs += 0.5 * dt * (fsrc(n) + fsrc(n - 1));
    abs_frhs += 0.5 * dt * (std::fabs(fsrc(n)) + std::fabs(fsrc(n - 1)));
    const double dW = s.field[n] - s.field[0];
    const double dK = kFourPi * (s.kinetic[n] - s.kinetic[0]);
    defect = std::fmax(defect, std::fabs(dW + dK - rhs));
    scale = std::fmax(scale, std::fabs(dW) + std::fabs(dK) + abs_rhs);
    field_defect = std::fmax(field_defect, std::fabs(dW - frhs));
    field_scale = std::fmax(field_scale, std::fabs(dW) + abs_frhs);
  }
  r.residual = scale > 0.0 ? defect / scale : 0.0;
  r.tolerance = tol;
  r.pass = !thresholded || r.residual <= tol;
  r.values = {{"defect", defect},
              {"scale", scale},
              {"relative_defect", r.residual},
              {"field_relative_defect", field_scale > 0.0 ? field_defect / field_scale : 0.0}};
  return r;
}

double total_mass(const PhaseDensity& f, double t, const VelocityGrid& vg, int n_space, int threads) {
  return kinetic_totals(f, t, vg, nullptr, n_space, threads).mass;
}

AuditReport mass_flux_audit(const PhaseDensity& f, ClosureKind closure, const VelocityGrid& vg, double T,
                            const std::vector<std::pair<double, double>>& wall_points, const MassFluxOptions& opt) {
  AuditReport r;
  r.name = "mass_flux";
  r.thresholded = closure != ClosureKind::Inflow;
  double flux = 0.0, out = 0.0, drift = 0.0, extra = 0.0;
  bool flux_ok = true;
  const double m0 = total_mass(f, 0.0, vg, opt.n_space, opt.threads);
  for (int k = 1; k <= opt.n_times; ++k) {
    const double t = T * k / opt.n_times;
    for (const auto& [x1, x2] : wall_points) {
      const double q = std::fabs(net_wall_flux(f, t, x1, x2, vg));
      const double e = opt.pointwise_tol ? opt.pointwise_tol(t, x1, x2) : 0.0;
      flux = std::fmax(flux, q);
      extra = std::fmax(extra, e);
      flux_ok = flux_ok && q <= opt.flux_tol + e;
      out = std::fmax(out, outgoing_wall_flux(f, t, x1, x2, vg));
    }
    const double m = total_mass(f, t, vg, opt.n_space, opt.threads);
    if (m0 > 0.0) drift = std::fmax(drift, std::fabs(m - m0) / m0);
  }
  r.residual = flux;
  r.tolerance = opt.flux_tol + extra;
  r.pass = !r.thresholded || (flux_ok && drift <= opt.mass_tol);
  r.values = {{"flux_sup", flux}, {"outflux_sup", out}, {"mass0", m0}, {"mass_drift", drift},
              {"flux_tol", opt.flux_tol}, {"pointwise_tol_sup", extra}, {"mass_tol", opt.mass_tol}};
  if (!r.thresholded) r.note = "inflow closure: the null-flux condition does not apply";
  return r;
}

DerivativeSample derivative_sample(const PhaseDensity& f, double t, const Vec3& x, const Vec3& v, double hx, double hv,
                                   const WeightContext& ctx) {
  DerivativeSample d;
  auto dx = [&](int c) {
    Vec3 a = x, b = x;
    a[c] += hx;
    b[c] -= hx;
    return (f.value(t, a, v) - f.value(t, b, v)) / (2 * hx);
  };
  auto dv = [&](int c) {
    Vec3 a = v, b = v;
    a[c] += hv;
    b[c] -= hv;
    return (f.value(t, x, a) - f.value(t, x, b)) / (2 * hv);
  };
  d.dx_par = std::hypot(dx(0), dx(1));
  d.dx3 = std::fabs(dx(2));
  d.dv = std::sqrt(dv(0) * dv(0) + dv(1) * dv(1) + dv(2) * dv(2));
  d.alpha = alpha(t, x, v, ctx);
  d.jv = jbracket(v);
  return d;
}

AuditReport weighted_derivative_audit(const PhaseDensity& f, const std::vector<std::pair<double, PhasePoint>>& probes,
                                      const WeightContext& ctx, double hx, double hv) {
  AuditReport r;
  r.name = "weighted_derivatives";
  r.thresholded = false;
  const double dl = ctx.env.delta;
  double a = 0, b = 0, c = 0, u = 0;
  std::size_t used = 0;
  for (const auto& [t, p] : probes) {
    if (std::fabs(p.v[2]) < 1e-3 || p.x[2] < 2 * hx) continue;
    const DerivativeSample d = derivative_sample(f, t, p.x, p.v, hx, hv, ctx);
    a = std::fmax(a, std::pow(d.jv, 4 + dl) * d.dx_par);
    b = std::fmax(b, std::pow(d.jv, 5 + dl) * d.alpha * d.dx3);
    c = std::fmax(c, std::pow(d.jv, 5 + dl) * d.dv);
    u = std::fmax(u, d.dx3);
    ++used;
  }
  r.values = {{"weighted_dx_par", a}, {"weighted_alpha_dx3", b}, {"weighted_dv", c}, {"unweighted_dx3", u},
              {"probes", static_cast<double>(used)}};
  r.residual = b;
  r.pass = true;
  return r;
}

AuditReport gamma0_approach(const PhaseDensity& f, double t, double x1, double x2, const Vec3& v,
                            const std::vector<double>& x3s, const WeightContext& ctx, double min_growth,
                            double max_spread) {
  AuditReport r;
  r.name = "gamma0_approach";
  const double dl = ctx.env.delta;
  std::vector<double> un, we;
  for (double x3 : x3s) {
    const Vec3 x{x1, x2, x3};
    const double h = 0.05 * x3;
    Vec3 a = x, b = x;
    a[2] += h;
    b[2] -= h;
    const double d3 = std::fabs(f.value(t, a, v) - f.value(t, b, v)) / (2 * h);
    const double al = alpha(t, x, v, ctx);
    un.push_back(d3);
    we.push_back(std::pow(jbracket(v), 5 + dl) * al * d3);
    r.values.push_back({"x3=" + std::to_string(x3) + " dx3f", d3});
    r.values.push_back({"x3=" + std::to_string(x3) + " weighted", we.back()});
    r.values.push_back({"x3=" + std::to_string(x3) + " alpha", al});
  }
  const double growth = un.front() > 0.0 ? un.back() / un.front() : 0.0;
  const auto [mn, mx] = std::minmax_element(we.begin(), we.end());
  const double spread = *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
  r.values.push_back({"growth", growth});
  r.values.push_back({"spread", spread});
  r.residual = spread;
  r.tolerance = max_spread;
  r.pass = growth >= min_growth && spread <= max_spread;
  return r;
}

}  // namespace hsvm
