#include "hsvm/gs_fields.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hsvm/parallel.hpp"
#include "hsvm/quadrature.hpp"

namespace hsvm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Vec3 kSE{-1.0, -1.0, 1.0};  // image sign for E
constexpr Vec3 kSB{1.0, 1.0, -1.0};   // image sign for B

struct PolarNode {
  double mu;
  double w;
};

// Polar rule on a sphere of radius R about a point at height x3, split where the sphere meets the wall.
std::vector<PolarNode> polar_rule(double x3, double R, int n) {
  std::vector<PolarNode> out;
  const double mc = R > x3 ? -x3 / R : -1.0;
  auto add = [&](double a, double b, int m) {
    const QuadRule q = gauss_legendre(m, a, b);
    for (std::size_t i = 0; i < q.x.size(); ++i) out.push_back({q.x[i], q.w[i]});
  };
  if (mc <= -1.0) {
    add(-1.0, 1.0, 2 * n);
  } else {
    add(-1.0, mc, n);
    add(mc, 1.0, n);
  }
  return out;
}

Vec3 mul(const Vec3& a, const Vec3& b) { return {a[0] * b[0], a[1] * b[1], a[2] * b[2]}; }

bool box_inside(const Box& inner, const Box& outer) {
  return inner.empty() || (outer.contains(inner.lo) && outer.contains(inner.hi));
}

}  // namespace

namespace kernel {

Vec3 bulk_E(const Vec3& v, const Vec3& omega) {
  const double jv = jbracket(v);
  const Vec3 vh = (1.0 / jv) * v;
  const double d = one_plus_vhat_dot(v, omega);
  return (-1.0 / (jv * jv * d * d)) * (vh + omega);
}

Vec3 bulk_B(const Vec3& v, const Vec3& omega) {
  const double jv = jbracket(v);
  const Vec3 vh = (1.0 / jv) * v;
  const double d = one_plus_vhat_dot(v, omega);
  return (1.0 / (jv * jv * d * d)) * cross(omega, vh);
}

void S_E(const Vec3& v, const Vec3& omega, Vec3 rows[3]) {
  const double jv = jbracket(v);
  const Vec3 vh = (1.0 / jv) * v;
  const double d = one_plus_vhat_dot(v, omega);
  const Vec3 a = omega - dot(omega, vh) * vh;
  for (int i = 0; i < 3; ++i) {
    Vec3 ei;
    ei[i] = 1.0;
    rows[i] = (1.0 / (jv * d * d)) * ((ei - vh[i] * vh) * d - (omega[i] + vh[i]) * a);
  }
}

void S_B(const Vec3& v, const Vec3& omega, Vec3 rows[3]) {
  const double jv = jbracket(v);
  const Vec3 vh = (1.0 / jv) * v;
  const double d = one_plus_vhat_dot(v, omega);
  const Vec3 wv = cross(omega, v);
  const double den = jv * d;
  for (int i = 0; i < 3; ++i) {
    // (omega x F)_i = F . (e_i x omega)
    Vec3 ei;
    ei[i] = 1.0;
    rows[i] = (1.0 / den) * cross(ei, omega) - (wv[i] / (den * den)) * (vh + omega);
  }
}

Vec3 sphere_E(const Vec3& v, const Vec3& omega) {
  const double jv = jbracket(v);
  const Vec3 vh = (1.0 / jv) * v;
  const double d = one_plus_vhat_dot(v, omega);
  return (1.0 / d) * (omega - dot(omega, vh) * vh);
}

Vec3 sphere_B(const Vec3& v, const Vec3& omega) {
  const Vec3 vh = rel_velocity(v);
  return (1.0 / one_plus_vhat_dot(v, omega)) * cross(omega, vh);
}

}  // namespace kernel

KernelBoundReport kernel_bound_audit(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  KernelBoundReport rep;
  auto unit = [&]() {
    Vec3 w{N(rng), N(rng), N(rng)};
    return (1.0 / norm(w)) * w;
  };
  auto check = [&](double lhs, double rhs, const char* name) {
    const double ratio = lhs / rhs;
    // relative slack for rounding in the kernels themselves
    if (ratio > 1.0 + 1e-12) ++rep.violations;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_check = name;
    }
  };
  for (std::size_t k = 0; k < n; ++k) {
    const double mag = std::pow(10.0, -3.0 + 7.0 * U(rng));
    const Vec3 v = mag * unit();
    Vec3 omega;
    if (k % 2 == 0) {
      omega = unit();
    } else {
      // near antipodal: the singular direction of 1 / (1 + vhat.omega)
      const double eps = std::pow(10.0, -8.0 * U(rng));
      omega = -1.0 * (1.0 / mag) * v + eps * unit();
      omega = (1.0 / norm(omega)) * omega;
    }
    const double jv = jbracket(v);
    const double v2 = norm2(v);
    const Vec3 vh = (1.0 / jv) * v;
    const double d = one_plus_vhat_dot(v, omega);
    const double vxw2 = norm2(cross(v, omega));

    check(1.0 / d, 2.0 * (1.0 + v2) / (1.0 + vxw2), "1/(1+vhat.w) <= 2(1+|v|^2)/(1+|v x w|^2)");
    check(2.0 * (1.0 + v2) / (1.0 + vxw2), 2.0 * (1.0 + v2), "2(1+|v|^2)/(1+|v x w|^2) <= 2(1+|v|^2)");
    check(norm2(omega + vh), 2.0 * d, "|w+vhat|^2 <= 2(1+vhat.w)");

    const Vec3 kE = kernel::bulk_E(v, omega);
    const Vec3 kB = kernel::bulk_B(v, omega);
    Vec3 SE[3], SB[3];
    kernel::S_E(v, omega, SE);
    kernel::S_B(v, omega, SB);
    const Vec3 wx = cross(omega, vh);
    for (int i = 0; i < 3; ++i) {
      check(std::fabs(kE[i]), std::sqrt(2.0) / ((1.0 + v2) * std::pow(d, 1.5)), "bulk E kernel, middle");
      check(std::sqrt(2.0) / ((1.0 + v2) * std::pow(d, 1.5)), 4.0 * jv, "bulk E kernel, outer");
      check(std::fabs(kB[i]), 8.0 * jv, "bulk B kernel");
      check(norm(SE[i]), 12.0 * jv, "|S^E_i| <= 12 <v>");
      check(norm(SB[i]), 12.0 * jv, "|S^B_i| <= 12 <v>");
      check(std::fabs(omega[i] + vh[i]) / d, 2.0 * jv, "|(w_i+vhat_i)/(1+vhat.w)| <= 2<v>");
      check(std::fabs(wx[i]) / d, 2.0 * jv, "|(w x vhat)_i/(1+vhat.w)| <= 2<v>");
    }
    ++rep.samples;
  }
  return rep;
}

GsQuadrature GsQuadrature::refined() const {
  GsQuadrature r = *this;
  r.n_radial *= 2;
  r.n_polar *= 2;
  r.n_azimuth *= 2;
  r.n_disk_radial *= 2;
  r.n_disk_azimuth *= 2;
  r.n_sphere_polar *= 2;
  r.n_sphere_azimuth *= 2;
  return r;
}

void GsQuadrature::validate() const {
  if (n_radial < 1 || n_polar < 1 || n_azimuth < 1 || n_disk_radial < 1 || n_disk_azimuth < 1 ||
      n_sphere_polar < 1 || n_sphere_azimuth < 1)
    throw ConfigError("field quadrature orders must be positive");
}

FieldSample GsTerms::total() const {
  FieldSample s;
  for (const FieldSample* p : {&data, &sphere, &bulk, &sterm, &wall, &neumann}) {
    s.E += p->E;
    s.B += p->B;
  }
  return s;
}

GsSolver::GsSolver(std::shared_ptr<const InitialFieldData> init, std::shared_ptr<const InitialDensity> f0,
                   VelocityGrid vg, GsOptions opt)
    : init_(std::move(init)), f0_(std::move(f0)), vg_(std::move(vg)), opt_(opt) {
  opt_.q.validate();
  if (!init_) init_ = std::make_shared<ZeroInitialFields>();
  if (!f0_) f0_ = std::make_shared<ZeroDensity>();
}

Vec3 GsSolver::initial_current(const Vec3& y) const {
  Vec3 J;
  if (!f0_->support().contains(y)) return J;
  for (std::size_t a = 0; a < vg_.size(); ++a) {
    const double f = f0_->value(y, vg_.v[a]);
    if (f != 0.0) J += (vg_.w[a] * f) * vg_.vhat[a];
  }
  return J;
}

void GsSolver::add_data(double t, const Vec3& x, GsTerms& out) const {
  const auto pol = polar_rule(x[2], t, opt_.q.n_sphere_polar);
  const int nphi = opt_.q.n_sphere_azimuth;
  const double dphi = 2.0 * kPi / nphi;
  for (const PolarNode& pn : pol) {
    const double st = std::sqrt(std::fmax(0.0, 1.0 - pn.mu * pn.mu));
    for (int k = 0; k < nphi; ++k) {
      const double phi = (k + 0.5) * dphi;
      const Vec3 om{st * std::cos(phi), st * std::sin(phi), pn.mu};
      const Vec3 y = x + t * om;
      const bool lower = y[2] < 0.0;
      const Vec3 yy = lower ? reflect(y) : y;
      const Vec3 d = t * (lower ? reflect(om) : om);  // reflected (y - x) for the image part
      const FieldSample F0 = init_->at(yy);
      double dE[3][3], dB[3][3];
      init_->gradient(yy, dE, dB);
      const Vec3 curlE{dE[2][1] - dE[1][2], dE[0][2] - dE[2][0], dE[1][0] - dE[0][1]};
      const Vec3 curlB{dB[2][1] - dB[1][2], dB[0][2] - dB[2][0], dB[1][0] - dB[0][1]};
      const Vec3 dtE = curlB - 4.0 * kPi * initial_current(yy);
      const Vec3 dtB = -1.0 * curlE;
      const double wq = pn.w * dphi / (4.0 * kPi);
      for (int i = 0; i < 3; ++i) {
        const double kE = t * dtE[i] + F0.E[i] + dE[i][0] * d[0] + dE[i][1] * d[1] + dE[i][2] * d[2];
        const double kB = t * dtB[i] + F0.B[i] + dB[i][0] * d[0] + dB[i][1] * d[1] + dB[i][2] * d[2];
        out.data.E[i] += wq * (lower ? kSE[i] : 1.0) * kE;
        out.data.B[i] += wq * (lower ? kSB[i] : 1.0) * kB;
      }
    }
  }
}

void GsSolver::add_sphere(double t, const Vec3& x, GsTerms& out) const {
  const Box sup = f0_->support();
  if (sup.empty()) return;
  // the cone base and its mirror must reach the support
  if (sup.dist2(x) > t * t && sup.dist2(reflect(x)) > t * t) return;
  const auto pol = polar_rule(x[2], t, opt_.q.n_sphere_polar);
  const int nphi = opt_.q.n_sphere_azimuth;
  const double dphi = 2.0 * kPi / nphi;
  for (const PolarNode& pn : pol) {
    const double st = std::sqrt(std::fmax(0.0, 1.0 - pn.mu * pn.mu));
    for (int k = 0; k < nphi; ++k) {
      const double phi = (k + 0.5) * dphi;
      const Vec3 omega{st * std::cos(phi), st * std::sin(phi), pn.mu};
      const Vec3 y = x + t * omega;
      const bool lower = y[2] < 0.0;
      const Vec3 yy = lower ? reflect(y) : y;
      if (!sup.contains(yy)) continue;
      const Vec3 om = lower ? reflect(omega) : omega;
      // dS / t = t dOmega
      const double wq = t * pn.w * dphi;
      Vec3 aE, aB;
      for (std::size_t a = 0; a < vg_.size(); ++a) {
        const double f = f0_->value(yy, vg_.v[a]);
        if (f == 0.0) continue;
        const double wf = vg_.w[a] * f;
        aE -= wf * kernel::sphere_E(vg_.v[a], om);
        aB += wf * kernel::sphere_B(vg_.v[a], om);
      }
      if (lower) {
        aE = mul(kSE, aE);
        aB = mul(kSB, aB);
      }
      out.sphere.E += wq * aE;
      out.sphere.B += wq * aB;
    }
  }
}

void GsSolver::add_ball(double t, const Vec3& x, const SourceModel& src, GsTerms& out) const {
  const Box sup_t = src.f->support(t);
  if (sup_t.empty()) return;
  if (sup_t.dist2(x) > t * t && sup_t.dist2(reflect(x)) > t * t) return;
  const QuadRule rr = gauss_legendre(opt_.q.n_radial, 0.0, t);
  const int nphi = opt_.q.n_azimuth;
  const double dphi = 2.0 * kPi / nphi;
  for (std::size_t ir = 0; ir < rr.x.size(); ++ir) {
    const double r = rr.x[ir];
    const double s = t - r;
    const Box sup = src.f->support(s);
    if (sup.empty()) continue;
    const auto pol = polar_rule(x[2], r, opt_.q.n_polar);
    for (const PolarNode& pn : pol) {
      const double st = std::sqrt(std::fmax(0.0, 1.0 - pn.mu * pn.mu));
      for (int k = 0; k < nphi; ++k) {
        const double phi = (k + 0.5) * dphi;
        const Vec3 omega{st * std::cos(phi), st * std::sin(phi), pn.mu};
        const Vec3 y = x + r * omega;
        const bool lower = y[2] < 0.0;
        const Vec3 yy = lower ? reflect(y) : y;
        if (!sup.contains(yy)) continue;
        const Vec3 om = lower ? reflect(omega) : omega;
        const FieldSample fs = src.force ? src.force->at(s, yy) : FieldSample{};
        const double w_bulk = rr.w[ir] * pn.w * dphi;  // dy / r^2
        const double w_s = w_bulk * r;                 // dy / r
        Vec3 bE, bB, sE, sB;
        for (std::size_t a = 0; a < vg_.size(); ++a) {
          const Vec3& v = vg_.v[a];
          const double f = src.f->value(s, yy, v);
          if (f == 0.0) continue;
          const double wf = vg_.w[a] * f;
          const double jv = vg_.jv[a];
          const Vec3& vh = vg_.vhat[a];
          const double d = one_plus_vhat_dot(v, om);
          const Vec3 F = lorentz_force(fs.E, fs.B, v, src.env);
          bE -= (wf / (jv * jv * d * d)) * (vh + om);
          bB += (wf / (jv * jv * d * d)) * cross(om, vh);
          // S^E . F and S^B . F written without forming the rows
          const double vF = dot(vh, F);
          const double aF = dot(om, F) - dot(om, vh) * vF;
          sE -= (wf / (jv * d * d)) * ((F - vF * vh) * d - aF * (om + vh));
          const double den = jv * d;
          sB += wf * ((1.0 / den) * cross(om, F) - (dot(vh + om, F) / (den * den)) * cross(om, v));
        }
        if (lower) {
          bE = mul(kSE, bE);
          sE = mul(kSE, sE);
          bB = mul(kSB, bB);
          sB = mul(kSB, sB);
        }
        out.bulk.E += w_bulk * bE;
        out.bulk.B += w_bulk * bB;
        out.sterm.E += w_s * sE;
        out.sterm.B += w_s * sB;
      }
    }
  }
}

void GsSolver::add_wall(double t, const Vec3& x, const SourceModel& src, GsTerms& out) const {
  const double x3 = x[2];
  if (t <= x3) return;
  const Box sup_t = src.f->support(t);
  if (sup_t.empty() || sup_t.lo[2] > 0.0) return;
  const double rad = std::sqrt(t * t - x3 * x3);
  {
    const double dx = std::fmax(0.0, std::fmax(sup_t.lo[0] - x[0], x[0] - sup_t.hi[0]));
    const double dy = std::fmax(0.0, std::fmax(sup_t.lo[1] - x[1], x[1] - sup_t.hi[1]));
    if (dx * dx + dy * dy > rad * rad) return;
  }
  const QuadRule rr = gauss_legendre(opt_.q.n_disk_radial, x3, t);
  const int nphi = opt_.q.n_disk_azimuth;
  const double dphi = 2.0 * kPi / nphi;
  for (std::size_t ir = 0; ir < rr.x.size(); ++ir) {
    const double r = rr.x[ir];
    const double s = t - r;
    const Box sup = src.f->support(s);
    if (sup.empty() || sup.lo[2] > 0.0) continue;
    const double rho = std::sqrt(std::fmax(0.0, r * r - x3 * x3));
    for (int k = 0; k < nphi; ++k) {
      const double phi = (k + 0.5) * dphi;
      const double c = std::cos(phi), sn = std::sin(phi);
      const Vec3 y{x[0] + rho * c, x[1] + rho * sn, 0.0};
      if (!sup.contains(y)) continue;
      const Vec3 om{rho * c / r, rho * sn / r, -x3 / r};
      const Vec3 omb = reflect(om);
      const double wq = rr.w[ir] * dphi;  // dy|| / r = dr dphi
      Vec3 aE, aB, nE, nB;
      for (std::size_t a = 0; a < vg_.size(); ++a) {
        const Vec3& v = vg_.v[a];
        const double f = src.f->value(s, y, v);
        if (f == 0.0) continue;
        const double wf = vg_.w[a] * f;
        const Vec3& vh = vg_.vhat[a];
        const double d1 = one_plus_vhat_dot(v, om);
        const double d2 = one_plus_vhat_dot(v, omb);
        const Vec3 e3xv{-vh[1], vh[0], 0.0};
        for (int i = 0; i < 3; ++i) {
          const double di3 = i == 2 ? 1.0 : 0.0;
          aE[i] += wf * ((di3 - (om[i] + vh[i]) * vh[2] / d1) + kSE[i] * (di3 - (omb[i] + vh[i]) * vh[2] / d2));
        }
        const Vec3 c1 = cross(om, vh), c2 = cross(omb, vh);
        for (int i = 0; i < 3; ++i)
          aB[i] += wf * ((-e3xv[i] + c1[i] * vh[2] / d1) + kSB[i] * (-e3xv[i] + c2[i] * vh[2] / d2));
        nE[2] -= 2.0 * wf;
        nB[0] -= 2.0 * wf * vh[1];
        nB[1] += 2.0 * wf * vh[0];
      }
      out.wall.E += wq * aE;
      out.wall.B += wq * aB;
      out.neumann.E += (wq * opt_.neumann_sign) * nE;
      out.neumann.B += wq * nB;
    }
  }
}

GsTerms GsSolver::eval_terms(double t, const Vec3& x, const SourceModel& src) const {
  if (x[2] < 0.0) throw std::invalid_argument("field point below the wall");
  GsTerms out;
  if (t <= 0.0) {
    out.data = init_->at(x);
    return out;
  }
  if (!opt_.domain.empty() && src.f) {
    const Box sup = src.f->support(t);
    if (!box_inside(sup, opt_.domain))
      throw LightConeError("source support at t = " + std::to_string(t) + " leaves the computational box");
  }
  add_data(t, x, out);
  add_sphere(t, x, out);
  if (src.f) {
    add_ball(t, x, src, out);
    add_wall(t, x, src, out);
  }
  return out;
}

double neumann_boundary_term(double t, const Vec3& x, const ScalarTrace& rho_wall, int n_radial, int n_azimuth) {
  const double x3 = x[2];
  if (t <= x3) return 0.0;
  const QuadRule rr = gauss_legendre(n_radial, x3, t);
  const double dphi = 2.0 * kPi / n_azimuth;
  double w = 0.0;
  for (std::size_t ir = 0; ir < rr.x.size(); ++ir) {
    const double r = rr.x[ir];
    const double rho = std::sqrt(std::fmax(0.0, r * r - x3 * x3));
    double ring = 0.0;
    for (int k = 0; k < n_azimuth; ++k) {
      const double phi = (k + 0.5) * dphi;
      ring += rho_wall(t - r, x[0] + rho * std::cos(phi), x[1] + rho * std::sin(phi));
    }
    w += rr.w[ir] * ring * dphi;
  }
  return -2.0 * w;
}

FieldState tabulate_fields(const GsSolver& solver, const SourceModel& src, const GridSpec& grid, int threads) {
  FieldState st(grid);
  const std::size_t nn = grid.nodes();
  const std::size_t total = nn * static_cast<std::size_t>(grid.n_levels);
  parallel_for(total, threads, [&](std::size_t idx) {
    const int level = static_cast<int>(idx / nn);
    const std::size_t node = idx % nn;
    st.set(level, node, solver.eval(grid.time(level), grid.node(node), src));
  });
  return st;
}

}  // namespace hsvm
