#include <cstring>
#include <random>

#include "doctest.h"
#include "free_fall.hpp"
#include "hsvm/characteristics.hpp"
#include "hsvm/quadrature.hpp"

using namespace hsvm;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::shared_ptr<const BumpMaxwellian> bump() {
  return std::make_shared<BumpMaxwellian>(1.0, Vec3{0.0, 0.0, 0.5}, 0.3, Vec3{0.2, 0.0, -0.3}, 0.4);
}

}  // namespace

TEST_CASE("zero field: straight backward characteristics") {
  ZeroField zero;
  Environment env;
  const Vec3 x{0.1, -0.2, 0.7}, v{0.5, 1.0, -0.3};
  const PhasePoint p = integrate(0.4, x, v, 0.1, zero, env);
  const Vec3 expect = x - 0.3 * rel_velocity(v);
  for (int i = 0; i < 3; ++i) {
    CHECK(p.x[i] == doctest::Approx(expect[i]).epsilon(1e-13));
    CHECK(p.v[i] == v[i]);
  }
}

TEST_CASE("RK4 matches the closed-form free fall") {
  ZeroField zero;
  Environment env;
  env.g = 1.3;
  OdeOptions o;
  o.max_dt = 2e-3;
  const Vec3 x{0.0, 0.1, 0.8}, v{0.4, -0.2, 0.9};
  const PhasePoint p = integrate(0.5, x, v, 0.0, zero, env, o);
  Vec3 X, V;
  oracle::free_fall(x, v, env.g, -0.5, X, V);
  for (int i = 0; i < 3; ++i) {
    CHECK(p.x[i] == doctest::Approx(X[i]).epsilon(1e-10));
    CHECK(p.v[i] == doctest::Approx(V[i]).epsilon(1e-10));
  }
}

TEST_CASE("backward exit conventions") {
  ZeroField zero;
  Environment env;
  SUBCASE("incoming wall point exits at once") {
    const ExitEvent e = backward_exit(0.3, {0.1, 0.2, 0.0}, {0.0, 0.0, 0.5}, zero, env);
    CHECK_FALSE(e.reached_initial_time);
    CHECK(e.t_b == 0.0);
  }
  SUBCASE("interior point hits the wall at x3 / vhat3") {
    const Vec3 v{0.0, 0.3, 0.8};
    const ExitEvent e = backward_exit(1.0, {0.0, 0.0, 0.2}, v, zero, env);
    CHECK_FALSE(e.reached_initial_time);
    CHECK(e.t_b == doctest::Approx(0.2 / rel_velocity(v)[2]).epsilon(1e-9));
    CHECK(e.x_b[2] == 0.0);
  }
  SUBCASE("moving away from the wall reaches t = 0") {
    const ExitEvent e = backward_exit(0.5, {0.0, 0.0, 0.2}, {0.0, 0.0, -0.5}, zero, env);
    CHECK(e.reached_initial_time);
    CHECK(e.x_b[2] > 0.2);
  }
}

TEST_CASE("specular bounces reflect bitwise") {
  AnalyticField f([](double, const Vec3& x) {
    return FieldSample{{0.05 * x[1], -0.03, 0.02 * x[0]}, {0.01, 0.04 * x[2], 0.0}};
  });
  Environment env;
  env.g = 2.0;
  env.Be = 0.3;
  const SpecularResult r = specular_flow(3.0, {0.1, 0.0, 0.3}, {0.7, -0.4, 0.2}, 0.0, f, env, {}, 64);
  REQUIRE(r.cycles.count() >= 2);
  for (const Bounce& b : r.cycles.bounces) {
    CHECK(same_bits(b.v_out[0], b.v_in[0]));
    CHECK(same_bits(b.v_out[1], b.v_in[1]));
    CHECK(same_bits(b.v_out[2], -b.v_in[2]));
    CHECK(b.x[2] == 0.0);
  }
}

TEST_CASE("specular truncation freezes at the last bounce") {
  ZeroField zero;
  Environment env;
  env.g = 4.0;
  const SpecularResult r = specular_flow(5.0, {0.0, 0.0, 0.05}, {0.0, 0.0, 0.3}, 0.0, zero, env, {}, 2);
  CHECK(r.cycles.truncated);
  CHECK(r.cycles.count() == 2);
  CHECK(r.X[2] == 0.0);
}

TEST_CASE("c_mu normalizes the diffuse flux") {
  const QuadRule q = gauss_legendre(96, 0.0, 12.0);
  double I = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double r = q.x[k];
    I += q.w[k] * std::numbers::pi * r * r * r / std::sqrt(1 + r * r) * maxwellian_mu({r, 0, 0});
  }
  CHECK(c_mu() * I == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(diffuse_envelope_constant() > 1.0);
}

TEST_CASE("diffuse resampling draws from c_mu vhat3 mu") {
  std::mt19937_64 rng(11);
  const int n = 40000;
  double m3 = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec3 v = diffuse_resample(rng);
    REQUIRE(v[2] > 0.0);
    m3 += v[2];
  }
  m3 /= n;
  // E[v3] = c_mu int_{v3>0} v3 vhat3 mu dv
  const QuadRule q = gauss_legendre(96, 0.0, 12.0);
  double I = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double r = q.x[k];
    I += q.w[k] * (2.0 * std::numbers::pi / 3.0) * std::pow(r, 4) / std::sqrt(1 + r * r) * maxwellian_mu({r, 0, 0});
  }
  CHECK(m3 == doctest::Approx(c_mu() * I).epsilon(0.02));
}

TEST_CASE("quadrupling the sample count halves the Monte Carlo standard error") {
  auto batch_spread = [](int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int batches = 400;
    double s = 0.0, s2 = 0.0;
    for (int b = 0; b < batches; ++b) {
      double m = 0.0;
      for (int k = 0; k < n; ++k) m += diffuse_resample(rng)[2];
      m /= n;
      s += m;
      s2 += m * m;
    }
    const double mean = s / batches;
    return std::sqrt(s2 / batches - mean * mean);
  };
  const double r = batch_spread(400, 2) / batch_spread(100, 1);
  CHECK(r > 0.4);
  CHECK(r < 0.6);
}

TEST_CASE("stream seeds are reproducible and distinct") {
  const Vec3 x{0.1, 0.2, 0.3}, v{1, 2, 3};
  CHECK(stream_seed(5, 0.1, x, v) == stream_seed(5, 0.1, x, v));
  CHECK(stream_seed(5, 0.1, x, v) != stream_seed(6, 0.1, x, v));
  CHECK(stream_seed(5, 0.1, x, v) != stream_seed(5, 0.1, x, {1, 2, 3.0000001}));
}

TEST_CASE("closure names round trip") {
  for (ClosureKind k : {ClosureKind::Inflow, ClosureKind::Diffuse, ClosureKind::Specular})
    CHECK(closure_from_name(closure_name(k)) == k);
  CHECK_THROWS_AS(closure_from_name("absorbing"), ConfigError);
}

TEST_CASE("free streaming: f is f0 transported") {
  auto f0 = bump();
  auto zero = std::make_shared<ZeroField>();
  Environment env;
  KineticSolution ks(zero, env, BoundaryClosure::make_inflow(nullptr), f0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uz(0.3, 0.8), uv(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vec3 x{ux(rng), ux(rng), uz(rng)}, v{uv(rng), uv(rng), uv(rng)};
    const double t = 0.1;
    const Vec3 y = x - t * rel_velocity(v);
    CHECK(std::fabs(ks.value(t, x, v) - f0->value(y, v)) <= 1e-12);
  }
}

TEST_CASE("absorbing wall with zero inflow empties outgoing characteristics") {
  auto zero = std::make_shared<ZeroField>();
  Environment env;
  auto g = std::make_shared<GaussianInflow>(1.0, 0.0, 0.0, 0.2, Vec3{0, 0, 0.5}, 0.4);
  KineticSolution ks(zero, env, BoundaryClosure::make_inflow(g), bump());
  // a characteristic that started on the wall carries the inflow datum
  const Vec3 v{0.0, 0.0, 0.5};
  const double t = 0.2, x3 = 0.05;
  const FValue r = ks.evaluate(t, {0.0, 0.0, x3}, v);
  const double tb = x3 / rel_velocity(v)[2];
  CHECK(r.value == doctest::Approx(g->value(t - tb, 0.0, 0.0, v)).epsilon(1e-9));
}

TEST_CASE("diffuse cycles are deterministic for a fixed seed") {
  auto zero = std::make_shared<ZeroField>();
  Environment env;
  env.g = 1.0;
  EvalOptions eo;
  eo.seed = 42;
  eo.n_mc = 16;
  KineticSolution a(zero, env, BoundaryClosure::make_diffuse(), bump(), {}, eo);
  KineticSolution b(zero, env, BoundaryClosure::make_diffuse(), bump(), {}, eo);
  const Vec3 x{0.0, 0.0, 0.05}, v{0.1, 0.0, 0.4};
  const FValue fa = a.evaluate(0.3, x, v), fb = b.evaluate(0.3, x, v);
  CHECK(same_bits(fa.value, fb.value));
  CHECK(fa.bounces >= 1);
}

TEST_CASE("lagged specular closure reads the previous iterate at the reflected velocity") {
  auto zero = std::make_shared<ZeroField>();
  Environment env;
  auto f0 = bump();
  KineticSolution ks(zero, env, BoundaryClosure::make_specular(), f0);
  auto prev = std::make_shared<StaticDensity>(f0);
  ks.set_lagged_specular(prev);
  const Vec3 v{0.2, 0.0, 0.6};
  const double t = 0.3, x3 = 0.1;
  const double tb = x3 / rel_velocity(v)[2];
  const Vec3 xb = Vec3{0.0, 0.0, x3} - tb * rel_velocity(v);
  const double expect = f0->value({xb[0], xb[1], 0.0}, {v[0], v[1], -v[2]});
  CHECK(ks.value(t, {0.0, 0.0, x3}, v) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("exit time audit and Jacobian audit run on a simple field") {
  ZeroField zero;
  Environment env;
  env.g = 1.0;
  std::vector<PhasePoint> pts = {{{0, 0, 0.1}, {0.2, 0, 0.3}}, {{0, 0, 0.2}, {0, 0.1, -0.2}}};
  const TbAuditReport tb = tb_bound_audit(pts, 0.5, zero, env, 1.0);
  CHECK_FALSE(tb.refused);
  CHECK(tb.samples == 2);
  CHECK(tb_bound_audit(pts, 0.5, zero, env, -1.0).refused);
  const JacobianReport j = specular_jacobian_audit(0.4, {0, 0, 0.1}, {0.2, 0, 0.3}, 0.0, 1e-6, zero, env);
  CHECK(j.max_entry >= 1.0);
}
