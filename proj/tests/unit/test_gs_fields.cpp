#include <random>

#include "doctest.h"
#include "hsvm/gs_fields.hpp"

using namespace hsvm;

TEST_CASE("kernel bounds hold on random samples") {
  const KernelBoundReport r = kernel_bound_audit(20000, 5);
  CHECK(r.samples == 20000);
  CHECK(r.violations == 0);
  CHECK(r.worst_ratio <= 1.0 + 1e-12);
}

TEST_CASE("S kernels are the velocity gradients of their generating functions") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    Vec3 v = 2.0 * Vec3{n01(rng), n01(rng), n01(rng)};
    Vec3 w{n01(rng), n01(rng), n01(rng)};
    w = w / norm(w);
    Vec3 SE[3], SB[3];
    kernel::S_E(v, w, SE);
    kernel::S_B(v, w, SB);
    auto gE = [&](const Vec3& u, int i) { return (w[i] + rel_velocity(u)[i]) / one_plus_vhat_dot(u, w); };
    auto gB = [&](const Vec3& u, int i) { return cross(w, rel_velocity(u))[i] / one_plus_vhat_dot(u, w); };
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Vec3 vp = v, vm = v;
        vp[j] += h;
        vm[j] -= h;
        CHECK(SE[i][j] == doctest::Approx((gE(vp, i) - gE(vm, i)) / (2 * h)).epsilon(1e-5).scale(1.0));
        CHECK(SB[i][j] == doctest::Approx((gB(vp, i) - gB(vm, i)) / (2 * h)).epsilon(1e-5).scale(1.0));
      }
  }
}

TEST_CASE("Neumann wall term for a constant density") {
  const double rho0 = 0.7;
  auto rho = [rho0](double, double, double) { return rho0; };
  for (auto [t, x3] : {std::pair{0.5, 0.1}, std::pair{1.0, 0.5}, std::pair{0.2, 0.3}}) {
    const double got = neumann_boundary_term(t, {0.0, 0.0, x3}, rho);
    const double expect = -4.0 * std::numbers::pi * rho0 * std::fmax(0.0, t - x3);
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("zero data give zero fields") {
  auto init = std::make_shared<ZeroInitialFields>();
  auto f0 = std::make_shared<ZeroDensity>();
  GsSolver solver(init, f0, VelocityGrid::make(2.0, 6), GsOptions{});
  StaticDensity f(f0);
  ZeroField force;
  SourceModel src{&f, &force, Environment{}};
  const FieldSample s = solver.eval(0.1, {0.1, 0.2, 0.3}, src);
  CHECK(sup_norm(s.E) == 0.0);
  CHECK(sup_norm(s.B) == 0.0);
}

TEST_CASE("at t = 0 the solver returns the initial fields") {
  auto b = std::make_shared<BumpMaxwellian>(0.01, Vec3{0.0, 0.0, 0.4}, 0.25, Vec3{}, 0.4);
  auto init = std::make_shared<CoulombImageField>(0.01, Vec3{0.0, 0.0, 0.4}, 0.25);
  GsSolver solver(init, b, VelocityGrid::make(2.0, 6), GsOptions{});
  StaticDensity f(b);
  ZeroField force;
  SourceModel src{&f, &force, Environment{}};
  const Vec3 x{0.2, 0.0, 0.3};
  const FieldSample s = solver.eval(0.0, x, src);
  const FieldSample e = init->at(x);
  for (int i = 0; i < 3; ++i) CHECK(s.E[i] == e.E[i]);
}

TEST_CASE("Coulomb-plus-image field is compatible with its density") {
  auto b = std::make_shared<BumpMaxwellian>(0.01, Vec3{0.0, 0.0, 0.4}, 0.25, Vec3{}, 0.4);
  auto init = std::make_shared<CoulombImageField>(0.01, Vec3{0.0, 0.0, 0.4}, 0.25);
  const VelocityGrid vg = VelocityGrid::make(2.0, 10);
  Box region{{-0.5, -0.5, 0.0}, {0.5, 0.5, 0.8}};
  const CompatibilityReport r = compatibility_check(*init, *b, vg, region, 5, 2e-2);
  CHECK(r.ok);
  // tangential E vanishes on the wall
  const FieldSample w = init->at({0.3, -0.1, 0.0});
  CHECK(std::fabs(w.E[0]) < 1e-15);
  CHECK(std::fabs(w.E[1]) < 1e-15);
}

TEST_CASE("light cone leaving the domain is refused") {
  auto b = std::make_shared<BumpMaxwellian>(0.01, Vec3{0.0, 0.0, 0.4}, 0.25, Vec3{}, 0.4);
  auto init = std::make_shared<CoulombImageField>(0.01, Vec3{0.0, 0.0, 0.4}, 0.25);
  GsOptions o;
  o.domain = Box{{-0.2, -0.2, 0.0}, {0.2, 0.2, 0.7}};
  GsSolver solver(init, b, VelocityGrid::make(2.0, 6), o);
  StaticDensity f(b);
  ZeroField force;
  SourceModel src{&f, &force, Environment{}};
  CHECK_THROWS_AS(solver.eval(0.2, {0.0, 0.0, 0.3}, src), LightConeError);
}

TEST_CASE("quadrature settings are validated and refined") {
  GsQuadrature q;
  CHECK_NOTHROW(q.validate());
  const GsQuadrature r = q.refined();
  CHECK(r.n_radial == 2 * q.n_radial);
  CHECK(r.n_sphere_azimuth == 2 * q.n_sphere_azimuth);
  q.n_azimuth = 0;
  CHECK_THROWS(q.validate());
}
