#include "doctest.h"
#include "hsvm/characteristics.hpp"
#include "hsvm/moments.hpp"

using namespace hsvm;

namespace {

std::shared_ptr<const BumpMaxwellian> bump() {
  return std::make_shared<BumpMaxwellian>(0.5, Vec3{0.0, 0.0, 0.5}, 0.3, Vec3{0.2, 0.0, -0.3}, 0.4);
}

}  // namespace

TEST_CASE("velocity grid integrates a Maxwellian") {
  const VelocityGrid vg = VelocityGrid::make(2.0, 10);
  CHECK(vg.size() == 1000);
  auto b = bump();
  double s = 0.0;
  for (std::size_t a = 0; a < vg.size(); ++a) s += vg.w[a] * b->velocity_factor(vg.v[a]);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(vg.tail_integral > 0.0);
  CHECK(vg.tail_bound(2.0) == doctest::Approx(2.0 * vg.tail_integral));
}

TEST_CASE("moments of the initial bump") {
  const VelocityGrid vg = VelocityGrid::make(2.0, 10);
  auto b = bump();
  StaticDensity f(b);
  const Vec3 x{0.05, 0.0, 0.45};
  const Moments m = compute_moments(f, 0.0, x, vg);
  CHECK(m.rho == doctest::Approx(b->density(x)).epsilon(2e-3));
  CHECK(m.J[0] > 0.0);
  CHECK(m.J[2] < 0.0);
  CHECK(std::fabs(m.J[1]) < 1e-12);
  const Moments out = compute_moments(f, 0.0, {1.0, 1.0, 1.0}, vg);
  CHECK(out.rho == 0.0);
}

TEST_CASE("source history interpolation and append order") {
  GridSpec g;
  g.Lx = 1.0;
  g.Lz = 1.0;
  g.nx = g.ny = g.nz = 3;
  g.T = 0.1;
  g.n_levels = 2;
  SourceHistory h(g);
  std::vector<Moments> l0(g.nodes()), l1(g.nodes());
  for (auto& m : l1) m.rho = 2.0;
  h.append_level(l0);
  h.append_level(l1);
  CHECK(h.levels_filled() == 2);
  CHECK(h.at(0.05, {0.3, -0.2, 0.4}).rho == doctest::Approx(1.0));
  CHECK(h.get(1, 4).rho == 2.0);
}

TEST_CASE("free streaming sources satisfy continuity to grid accuracy") {
  GridSpec g;
  g.Lx = 0.6;
  g.Lz = 1.0;
  g.nx = g.ny = 9;
  g.nz = 9;
  g.T = 0.1;
  g.n_levels = 5;
  const VelocityGrid vg = VelocityGrid::make(2.0, 10);
  auto zero = std::make_shared<ZeroField>();
  KineticSolution f(zero, Environment{}, BoundaryClosure::make_inflow(nullptr), bump());
  const SourceHistory h = tabulate_sources(f, g, vg);
  const ContinuityResidual r = continuity_residual(h);
  CHECK(r.count > 0);
  double rho_max = 0.0;
  for (std::size_t n = 0; n < g.nodes(); ++n) rho_max = std::fmax(rho_max, h.get(0, n).rho);
  // time difference of rho over dt against a grid with ~4 nodes per radius
  CHECK(r.l2 < 0.2 * rho_max / 0.3);
}

TEST_CASE("wall flux of a downward beam") {
  const VelocityGrid vg = VelocityGrid::make(2.0, 10);
  auto b = std::make_shared<BumpMaxwellian>(1.0, Vec3{0.0, 0.0, 0.0}, 0.5, Vec3{0.0, 0.0, -0.5}, 0.4);
  StaticDensity f(b);
  const double out = outgoing_wall_flux(f, 0.0, 0.0, 0.0, vg);
  const double net = net_wall_flux(f, 0.0, 0.0, 0.0, vg);
  CHECK(out > 0.0);
  CHECK(net < 0.0);
  CHECK(-net <= out);
  GridSpec g;
  g.Lx = 0.5;
  g.Lz = 0.5;
  g.nx = g.ny = g.nz = 3;
  g.n_levels = 2;
  const WallFluxTable t = WallFluxTable::tabulate(f, g, vg);
  CHECK(t.get(0, 1, 1) == doctest::Approx(out));
  CHECK(t.at(0.05, 0.0, 0.0) == doctest::Approx(out));
}
