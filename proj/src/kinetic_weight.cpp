#include "hsvm/kinetic_weight.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hsvm/quadrature.hpp"

namespace hsvm {

double wall_force3(double t, const Vec3& x, const Vec3& v, const WeightContext& ctx) {
  FieldSample s{};
  if (ctx.fields) s = ctx.fields->at(t, {x[0], x[1], 0.0});
  return lorentz_force(s.E, s.B, v, ctx.env)[2];
}

double alpha(double t, const Vec3& x, const Vec3& v, const WeightContext& ctx) {
  const double jv = jbracket(v);
  const double vh3 = v[2] / jv;
  if (x[2] == 0.0) return std::fabs(vh3);
  const double F3 = wall_force3(t, x, v, ctx);
  const double rad = x[2] * x[2] + vh3 * vh3 - 2.0 * F3 * x[2] / jv;
  if (rad < 0.0) {
    if (rad > -1e-14) return 0.0;
    std::ostringstream os;
    os << "alpha: negative radicand " << rad << " at x3=" << x[2] << ", F3=" << F3
       << "; the sign condition g - Ee - E3 - (vhat x B)_3 > 0 is violated";
    throw SignConditionError(os.str());
  }
  return std::sqrt(rad);
}

PrReport measure_margin(WeightContext& ctx, double L, double T, double vmax, std::size_t n) {
  std::vector<PrSample> samples;
  samples.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    PrSample s;
    s.t = T * radical_inverse(k, 2);
    s.x1 = L * (2.0 * radical_inverse(k, 3) - 1.0);
    s.x2 = L * (2.0 * radical_inverse(k, 5) - 1.0);
    for (int c = 0; c < 3; ++c) s.v[c] = vmax * (2.0 * radical_inverse(k, c == 0 ? 7 : c == 1 ? 11 : 13) - 1.0);
    samples.push_back(s);
  }
  const FieldEvaluator* f = ctx.fields;
  auto e3 = [f](double t, double a, double b) { return f ? f->at(t, {a, b, 0.0}).E[2] : 0.0; };
  auto bw = [f](double t, double a, double b) { return f ? f->at(t, {a, b, 0.0}).B : Vec3{}; };
  PrReport rep = pr_condition_check(ctx.env, e3, bw, samples);
  ctx.c0 = rep.margin;
  return rep;
}

namespace {

struct Panel {
  double a, b;
};

std::vector<Panel> graded_panels(double x3) {
  std::vector<Panel> p;
  double eps = 0.5 * std::fmin(1.0, x3);
  double lo = 0.0, hi = eps;
  while (hi < 1.0) {
    p.push_back({lo, hi});
    lo = hi;
    hi *= 2.0;
  }
  p.push_back({lo, 1.0});
  return p;
}

std::pair<double, double> ball_estimate(double x3, double M, const WeightContext& ctx, double t,
                                        double x1, double x2, int nr, int nmu, int nphi,
                                        std::size_t& floor_hits) {
  const QuadRule rr = gauss_legendre(nr, 0.0, M);
  const auto panels = graded_panels(x3);
  const QuadRule& ref = gauss_legendre(nmu);
  const double dphi = 2.0 * std::numbers::pi / nphi;
  const Vec3 x{x1, x2, x3};
  double sum = 0.0, wsum = 0.0;
  for (std::size_t ir = 0; ir < rr.size(); ++ir) {
    const double r = rr.x[ir];
    const double jv = std::sqrt(1.0 + r * r);
    const double wdecay = std::pow(jv, -4.0 - ctx.env.delta);
    double shell = 0.0;
    for (const Panel& pn : panels) {
      const double h = 0.5 * (pn.b - pn.a), c = 0.5 * (pn.a + pn.b);
      for (std::size_t im = 0; im < ref.size(); ++im) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          const double mu = sgn * (c + h * ref.x[im]);
          const double st = std::sqrt(std::fmax(0.0, 1.0 - mu * mu));
          double ring = 0.0;
          for (int ip = 0; ip < nphi; ++ip) {
            const double ph = ip * dphi;
            const Vec3 v{r * st * std::cos(ph), r * st * std::sin(ph), r * mu};
            double a = alpha(t, x, v, ctx);
            if (a < ctx.eps_alpha) {
              a = ctx.eps_alpha;
              ++floor_hits;
            }
            ring += 1.0 / a;
          }
          shell += h * ref.w[im] * ring * dphi;
        }
      }
    }
    sum += rr.w[ir] * r * r * shell;
    wsum += rr.w[ir] * r * r * shell * wdecay;
  }
  return {sum, wsum};
}

}  // namespace

AlphaIntegral alpha_ball_integral(double x3, double M, const WeightContext& ctx, double t, double x1,
                                  double x2, double rel_tol, int max_refinements) {
  if (!(x3 > 0.0) || !(M > 0.0)) throw std::invalid_argument("alpha_ball_integral: need x3 > 0 and M > 0");
  AlphaIntegral out;
  out.bound = 4.0 * M * M * M * std::log(1.0 + 1.0 / x3);
  int nr = 8, nmu = 4, nphi = 4;
  std::size_t hits = 0;
  auto prev = ball_estimate(x3, M, ctx, t, x1, x2, nr, nmu, nphi, hits);
  for (int k = 1; k <= max_refinements; ++k) {
    nr *= 2;
    nmu *= 2;
    nphi *= 2;
    hits = 0;
    const auto cur = ball_estimate(x3, M, ctx, t, x1, x2, nr, nmu, nphi, hits);
    const double change = std::fabs(cur.first - prev.first) / std::fabs(cur.first);
    out.value = cur.first;
    out.weighted = cur.second;
    out.refinements = k;
    out.last_change = change;
    out.floor_hits = hits;
    if (change < rel_tol) return out;
    prev = cur;
  }
  std::ostringstream os;
  os << "alpha_ball_integral: no convergence after " << max_refinements << " refinements (estimate "
     << out.value << ", last relative change " << out.last_change << ")";
  throw QuadratureError(os.str(), out.value);
}

VelocityLemmaReport velocity_lemma_audit(const Trajectory& traj, const WeightContext& ctx) {
  VelocityLemmaReport rep;
  rep.samples = traj.size();
  if (traj.empty()) return rep;
  const auto& ref = traj.front();
  const double a0 = alpha(ref.s, ref.x, ref.v, ctx);
  if (a0 == 0.0) {
    rep.degenerate = true;
    return rep;
  }
  const double l0 = std::log(a0);
  double lprev = l0, sprev = ref.s;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const auto& p = traj[k];
    const double a = alpha(p.s, p.x, p.v, ctx);
    if (a == 0.0) {
      rep.hit_zero = true;
      break;
    }
    const double l = std::log(a);
    const double ds = std::fabs(p.s - ref.s);
    if (ds > 0.0) rep.max_log_slope = std::fmax(rep.max_log_slope, std::fabs(l - l0) / ds);
    const double dl = std::fabs(p.s - sprev);
    if (dl > 0.0) rep.max_local_slope = std::fmax(rep.max_local_slope, std::fabs(l - lprev) / dl);
    lprev = l;
    sprev = p.s;
  }
  rep.implied_C = rep.max_log_slope * ctx.c0 / 20.0;
  return rep;
}

}  // namespace hsvm
