#include "hsvm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hsvm/parallel.hpp"
#include "hsvm/quadrature.hpp"

namespace hsvm {

VelocityGrid VelocityGrid::make(double vmax, int nv, double delta) {
  if (nv < 2 || nv % 2 != 0) throw ConfigError("velocity.nv must be even and >= 2");
  if (!(vmax > 0.0)) throw ConfigError("velocity.vmax must be positive");
  VelocityGrid g;
  g.vmax = vmax;
  g.nv = nv;
  const QuadRule q = gauss_legendre(nv, -vmax, vmax);
  g.v.reserve(static_cast<std::size_t>(nv) * nv * nv);
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b)
      for (int c = 0; c < nv; ++c) {
        const Vec3 v{q.x[a], q.x[b], q.x[c]};
        g.v.push_back(v);
        g.jv.push_back(jbracket(v));
        g.vhat.push_back(rel_velocity(v));
        g.w.push_back(q.w[a] * q.w[b] * q.w[c]);
      }
  // 4 pi int_vmax^inf r^2 (1 + r^2)^{-(4+delta)/2} dr with r = vmax / s
  const QuadRule qs = gauss_legendre(64, 0.0, 1.0);
  double I = 0.0;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const double s = qs.x[k];
    const double r = vmax / s;
    I += qs.w[k] * r * r * std::pow(1.0 + r * r, -(4.0 + delta) / 2.0) * vmax / (s * s);
  }
  g.tail_integral = 4.0 * std::numbers::pi * I;
  return g;
}

Moments compute_moments(const PhaseDensity& f, double t, const Vec3& x, const VelocityGrid& vg) {
  Moments m;
  double fsum = 0.0;
  for (std::size_t n = 0; n < vg.size(); ++n) {
    const double fv = f.value(t, x, vg.v[n]);
    if (std::isnan(fv)) {
      std::ostringstream os;
      os << "compute_moments: NaN from f at v=(" << vg.v[n][0] << "," << vg.v[n][1] << "," << vg.v[n][2]
         << ")";
      throw QuadratureFailure(os.str(), vg.v[n]);
    }
    if (fv == 0.0) continue;
    const double wf = vg.w[n] * fv;
    m.rho += wf;
    m.J += wf * vg.vhat[n];
    fsum += std::fabs(wf);
  }
  if (norm(m.J) > m.rho + 1e-12 * (1.0 + fsum)) {
    std::ostringstream os;
    os << "compute_moments: |J| = " << norm(m.J) << " exceeds rho = " << m.rho;
    throw QuadratureFailure(os.str(), x);
  }
  return m;
}

SourceHistory::SourceHistory(const GridSpec& grid) : grid_(grid) {
  data_.reserve(grid.nodes() * grid.n_levels * 4);
}

Moments SourceHistory::get(int level, std::size_t node) const {
  const double* p = &data_[(static_cast<std::size_t>(level) * grid_.nodes() + node) * 4];
  return {p[0], {p[1], p[2], p[3]}};
}

void SourceHistory::append_level(const std::vector<Moments>& values) {
  if (values.size() != grid_.nodes()) throw std::invalid_argument("SourceHistory: level size mismatch");
  if (filled_ >= grid_.n_levels) throw std::logic_error("SourceHistory: all levels already filled");
  for (const auto& m : values) {
    data_.push_back(m.rho);
    for (int c = 0; c < 3; ++c) data_.push_back(m.J[c]);
  }
  ++filled_;
}

Moments SourceHistory::at(double t, const Vec3& x) const {
  const GridSpec& g = grid_;
  auto at_level = [&](int l) {
    const double h[3] = {g.hx(), g.hy(), g.hz()};
    const double lo[3] = {-g.Lx, -g.Lx, 0.0};
    const int n[3] = {g.nx, g.ny, g.nz};
    int i0[3];
    double fr[3];
    for (int a = 0; a < 3; ++a) {
      double s = std::clamp((x[a] - lo[a]) / h[a], 0.0, static_cast<double>(n[a] - 1));
      int i = std::min(static_cast<int>(std::floor(s)), n[a] - 2);
      i0[a] = i;
      fr[a] = s - i;
    }
    Moments m;
    for (int c = 0; c < 8; ++c) {
      const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
      const double w = (di ? fr[0] : 1 - fr[0]) * (dj ? fr[1] : 1 - fr[1]) * (dk ? fr[2] : 1 - fr[2]);
      if (w == 0.0) continue;
      const Moments s = get(l, g.index(i0[0] + di, i0[1] + dj, i0[2] + dk));
      m.rho += w * s.rho;
      m.J += w * s.J;
    }
    return m;
  };
  if (filled_ == 0) throw std::logic_error("SourceHistory: empty");
  const int last = filled_ - 1;
  if (t <= 0.0) return at_level(0);
  const double s = t / g.dt();
  if (s >= last) return at_level(last);
  const int l = static_cast<int>(std::floor(s));
  const double fr = s - l;
  const Moments a = at_level(l), b = at_level(l + 1);
  return {(1 - fr) * a.rho + fr * b.rho, (1 - fr) * a.J + fr * b.J};
}

SourceHistory tabulate_sources(const PhaseDensity& f, const GridSpec& grid, const VelocityGrid& vg, int threads) {
  SourceHistory h(grid);
  for (int l = 0; l < grid.n_levels; ++l) {
    const double t = grid.time(l);
    const Box sup = f.support(t);
    std::vector<Moments> vals(grid.nodes());
    parallel_for(grid.nodes(), threads, [&](std::size_t n) {
      const Vec3 x = grid.node(n);
      if (sup.empty() || !sup.contains(x)) return;
      vals[n] = compute_moments(f, t, x, vg);
    });
    h.append_level(vals);
  }
  return h;
}

ContinuityResidual continuity_residual(const SourceHistory& hist) {
  const GridSpec& g = hist.grid();
  ContinuityResidual r;
  if (hist.levels_filled() < 3) throw std::invalid_argument("continuity_residual: need >= 3 time levels");
  const double dt = g.dt(), hx = g.hx(), hy = g.hy(), hz = g.hz();
  double ss = 0.0;
  for (int l = 1; l + 1 < hist.levels_filled(); ++l)
    for (int i = 1; i + 1 < g.nx; ++i)
      for (int j = 1; j + 1 < g.ny; ++j)
        for (int k = 1; k + 1 < g.nz; ++k) {
          const double drho = (hist.get(l + 1, g.index(i, j, k)).rho - hist.get(l - 1, g.index(i, j, k)).rho) / (2 * dt);
          const double div = (hist.get(l, g.index(i + 1, j, k)).J[0] - hist.get(l, g.index(i - 1, j, k)).J[0]) / (2 * hx) +
                             (hist.get(l, g.index(i, j + 1, k)).J[1] - hist.get(l, g.index(i, j - 1, k)).J[1]) / (2 * hy) +
                             (hist.get(l, g.index(i, j, k + 1)).J[2] - hist.get(l, g.index(i, j, k - 1)).J[2]) / (2 * hz);
          const double res = drho + div;
          r.sup = std::fmax(r.sup, std::fabs(res));
          ss += res * res;
          ++r.count;
        }
  r.l2 = r.count ? std::sqrt(ss / r.count) : 0.0;
  return r;
}

double outgoing_wall_flux(const PhaseDensity& f, double t, double x1, double x2, const VelocityGrid& vg) {
  const Vec3 x{x1, x2, 0.0};
  double s = 0.0;
  for (std::size_t n = 0; n < vg.size(); ++n) {
    if (!(vg.v[n][2] < 0.0)) continue;
    const double fv = f.value(t, x, vg.v[n]);
    if (fv != 0.0) s += vg.w[n] * fv * std::fabs(vg.vhat[n][2]);
  }
  return s;
}

double net_wall_flux(const PhaseDensity& f, double t, double x1, double x2, const VelocityGrid& vg) {
  const Vec3 x{x1, x2, 0.0};
  double s = 0.0;
  for (std::size_t n = 0; n < vg.size(); ++n) {
    const double fv = f.value(t, x, vg.v[n]);
    if (fv != 0.0) s += vg.w[n] * fv * vg.vhat[n][2];
  }
  return s;
}

WallFluxTable WallFluxTable::tabulate(const PhaseDensity& f, const GridSpec& grid, const VelocityGrid& vg,
                                      int threads) {
  WallFluxTable t;
  t.grid_ = grid;
  const std::size_t per = static_cast<std::size_t>(grid.nx) * grid.ny;
  t.data_.assign(per * grid.n_levels, 0.0);
  for (int l = 0; l < grid.n_levels; ++l) {
    const double tl = grid.time(l);
    const Box sup = f.support(tl);
    parallel_for(per, threads, [&](std::size_t n) {
      const int i = static_cast<int>(n / grid.ny), j = static_cast<int>(n % grid.ny);
      const Vec3 x = grid.node(i, j, 0);
      if (sup.empty() || !sup.contains(x)) return;
      t.data_[l * per + n] = outgoing_wall_flux(f, tl, x[0], x[1], vg);
    });
  }
  return t;
}

double WallFluxTable::at_level(int level, double x1, double x2) const {
  const GridSpec& g = grid_;
  double s = std::clamp((x1 + g.Lx) / g.hx(), 0.0, static_cast<double>(g.nx - 1));
  double r = std::clamp((x2 + g.Lx) / g.hy(), 0.0, static_cast<double>(g.ny - 1));
  const int i = std::min(static_cast<int>(std::floor(s)), g.nx - 2);
  const int j = std::min(static_cast<int>(std::floor(r)), g.ny - 2);
  const double a = s - i, b = r - j;
  return (1 - a) * (1 - b) * get(level, i, j) + a * (1 - b) * get(level, i + 1, j) +
         (1 - a) * b * get(level, i, j + 1) + a * b * get(level, i + 1, j + 1);
}

double WallFluxTable::at(double t, double x1, double x2) const {
  if (data_.empty()) return 0.0;
  if (t <= 0.0) return at_level(0, x1, x2);
  const double s = t / grid_.dt();
  if (s >= grid_.n_levels - 1) return at_level(grid_.n_levels - 1, x1, x2);
  const int l = static_cast<int>(std::floor(s));
  const double fr = s - l;
  return (1 - fr) * at_level(l, x1, x2) + fr * at_level(l + 1, x1, x2);
}

}  // namespace hsvm
