#include <sstream>

#include "doctest.h"
#include "hsvm/presets.hpp"
#include "hsvm/scenario.hpp"

using namespace hsvm;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("presets round trip through json") {
  const auto names = list_presets();
  CHECK(names.size() == 5);
  for (const auto& n : names) {
    const RunConfig c = preset_config(n);
    CHECK_NOTHROW(validate(c));
    const RunConfig d = config_from_json(json::parse(to_json(c).dump()));
    CHECK(c == d);
    CHECK(describe_preset(n).contains("parameters"));
  }
  CHECK(error_of([] { preset_config("nope"); }).find("unknown preset") != std::string::npos);
}

TEST_CASE("config rejections name the field") {
  json j = to_json(preset_config("free-stream"));
  j["domain"]["bogus"] = 1;
  CHECK(error_of([&] { config_from_json(j); }).find("domain.bogus") != std::string::npos);

  RunConfig c = preset_config("free-stream");
  c.time.T = 0.6;
  CHECK(error_of([&] { validate(c); }).find("time.T") != std::string::npos);
  c = preset_config("free-stream");
  c.velocity.nv = 9;
  CHECK(error_of([&] { validate(c); }).find("velocity.nv") != std::string::npos);
  c = preset_config("free-stream");
  c.domain.Lx = 0.2;
  CHECK(error_of([&] { validate(c); }).find("domain.Lx") != std::string::npos);
  c = preset_config("free-stream");
  c.bc.preset = "constant";
  CHECK(error_of([&] { validate(c); }).find("constant") != std::string::npos);
  c = preset_config("free-stream");
  c.init.fields = "zero";
  CHECK(error_of([&] { validate(c); }).find("div E0") != std::string::npos);
  c = preset_config("free-stream");
  c.env.g = -1.0;
  CHECK(error_of([&] { validate(c); }).find("env") != std::string::npos);
}

TEST_CASE("builders follow the config") {
  const RunConfig c = preset_config("specular-billiard");
  const Problem p = make_problem(c);
  CHECK(p.closure.kind == ClosureKind::Specular);
  CHECK(p.f0 != nullptr);
  const PicardOptions o = make_picard_options(c);
  CHECK(o.grid.nx == c.domain.nx);
  CHECK(o.require_pr == c.picard.require_pr);
  CHECK_FALSE(o.gs.domain.empty());
}

TEST_CASE("snapshot layout and round trip") {
  CHECK(std::string(snapshot_header()) == "t,x1,x2,x3,E1,E2,E3,B1,B2,B3,rho,J1,J2,J3");
  GridSpec g;
  g.Lx = 1.0;
  g.Lz = 1.0;
  g.nx = g.ny = g.nz = 3;
  g.T = 0.1;
  g.n_levels = 2;
  AnalyticField af([](double t, const Vec3& x) {
    return FieldSample{{x[0] / 3.0, t, 1e-17}, {std::sqrt(2.0), -x[2], 0.1 * x[1]}};
  });
  const FieldState fs = sample_field(g, af);
  SourceHistory h(g);
  std::vector<Moments> m(g.nodes());
  for (std::size_t n = 0; n < m.size(); ++n) m[n] = {1.0 / (n + 3.0), {0.1, -0.2 / (n + 1.0), 0.0}};
  h.append_level(m);
  h.append_level(m);
  std::stringstream ss;
  write_snapshot(ss, fs, h, 1);
  std::string first;
  std::getline(ss, first);
  CHECK(first == snapshot_header());
  std::string row;
  std::getline(ss, row);
  CHECK(row.rfind("0.10000000000000001,-1,-1,0,", 0) == 0);
  ss.seekg(0);
  FieldState back(g);
  std::vector<Moments> mb;
  read_snapshot(ss, back, mb, 1);
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    const FieldSample a = fs.get(1, n), b = back.get(1, n);
    for (int i = 0; i < 3; ++i) {
      CHECK(a.E[i] == b.E[i]);
      CHECK(a.B[i] == b.B[i]);
      CHECK(mb[n].J[i] == m[n].J[i]);
    }
    CHECK(mb[n].rho == m[n].rho);
  }
}
