#include "hsvm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hsvm/initial_fields.hpp"

namespace hsvm {

namespace {

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError(path + "." + k + ": unknown key");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

json obj(const json& j, const char* key) { return j.contains(key) ? j.at(key) : json::object(); }

Vec3 vec(const json& p, const char* key, Vec3 dflt) {
  if (!p.contains(key)) return dflt;
  const auto& a = p.at(key);
  if (!a.is_array() || a.size() != 3) throw ConfigError(std::string(key) + ": expected an array of 3 numbers");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

double num(const json& p, const char* key, double dflt) { return p.contains(key) ? p.at(key).get<double>() : dflt; }

}  // namespace

bool RunConfig::operator==(const RunConfig& o) const {
  return name == o.name && domain == o.domain && velocity == o.velocity && time == o.time && env.g == o.env.g &&
         env.Ee == o.env.Ee && env.Be == o.env.Be && env.delta == o.env.delta && bc == o.bc && init == o.init &&
         picard == o.picard && quadrature == o.quadrature && ode == o.ode && seed == o.seed && threads == o.threads &&
         output == o.output;
}

json to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["domain"] = {{"Lx", c.domain.Lx}, {"Lz", c.domain.Lz}, {"nx", c.domain.nx}, {"ny", c.domain.ny}, {"nz", c.domain.nz}};
  j["velocity"] = {{"vmax", c.velocity.vmax}, {"nv", c.velocity.nv}};
  j["time"] = {{"T", c.time.T}, {"n_levels", c.time.n_levels}};
  j["env"] = {{"g", c.env.g}, {"Ee", c.env.Ee}, {"Be", c.env.Be}, {"delta", c.env.delta}};
  j["bc"] = {{"kind", c.bc.kind}, {"preset", c.bc.preset}, {"params", c.bc.params}};
  j["init"] = {{"f0", c.init.f0}, {"f0_params", c.init.f0_params}, {"fields", c.init.fields},
               {"field_params", c.init.field_params}};
  j["picard"] = {{"max_iter", c.picard.max_iter}, {"tol", c.picard.tol}, {"n_probes", c.picard.n_probes},
                 {"require_pr", c.picard.require_pr}};
  j["quadrature"] = {{"radial", c.quadrature.radial},
                     {"angular", c.quadrature.angular},
                     {"azimuth", c.quadrature.azimuth},
                     {"disk_radial", c.quadrature.disk_radial},
                     {"disk_angular", c.quadrature.disk_angular},
                     {"sphere_polar", c.quadrature.sphere_polar},
                     {"sphere_azimuth", c.quadrature.sphere_azimuth}};
  j["ode"] = {{"step_factor", c.ode.step_factor}, {"max_dt", c.ode.max_dt}, {"k_max", c.ode.k_max}, {"n_mc", c.ode.n_mc}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = {{"dir", c.output.dir}, {"stride", c.output.stride}};
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  check_keys(j, "config",
             {"name", "domain", "velocity", "time", "env", "bc", "init", "picard", "quadrature", "ode", "seed", "threads",
              "output"});
  read(j, "name", c.name, "config");
  const json d = obj(j, "domain");
  check_keys(d, "domain", {"Lx", "Lz", "nx", "ny", "nz"});
  read(d, "Lx", c.domain.Lx, "domain");
  read(d, "Lz", c.domain.Lz, "domain");
  read(d, "nx", c.domain.nx, "domain");
  read(d, "ny", c.domain.ny, "domain");
  read(d, "nz", c.domain.nz, "domain");
  const json v = obj(j, "velocity");
  check_keys(v, "velocity", {"vmax", "nv"});
  read(v, "vmax", c.velocity.vmax, "velocity");
  read(v, "nv", c.velocity.nv, "velocity");
  const json t = obj(j, "time");
  check_keys(t, "time", {"T", "n_levels"});
  read(t, "T", c.time.T, "time");
  read(t, "n_levels", c.time.n_levels, "time");
  const json e = obj(j, "env");
  check_keys(e, "env", {"g", "Ee", "Be", "delta"});
  read(e, "g", c.env.g, "env");
  read(e, "Ee", c.env.Ee, "env");
  read(e, "Be", c.env.Be, "env");
  read(e, "delta", c.env.delta, "env");
  const json b = obj(j, "bc");
  check_keys(b, "bc", {"kind", "preset", "params"});
  read(b, "kind", c.bc.kind, "bc");
  read(b, "preset", c.bc.preset, "bc");
  if (b.contains("params")) c.bc.params = b.at("params");
  const json i = obj(j, "init");
  check_keys(i, "init", {"f0", "f0_params", "fields", "field_params"});
  read(i, "f0", c.init.f0, "init");
  read(i, "fields", c.init.fields, "init");
  if (i.contains("f0_params")) c.init.f0_params = i.at("f0_params");
  if (i.contains("field_params")) c.init.field_params = i.at("field_params");
  const json p = obj(j, "picard");
  check_keys(p, "picard", {"max_iter", "tol", "n_probes", "require_pr"});
  read(p, "max_iter", c.picard.max_iter, "picard");
  read(p, "tol", c.picard.tol, "picard");
  read(p, "n_probes", c.picard.n_probes, "picard");
  read(p, "require_pr", c.picard.require_pr, "picard");
  const json q = obj(j, "quadrature");
  check_keys(q, "quadrature",
             {"radial", "angular", "azimuth", "disk_radial", "disk_angular", "sphere_polar", "sphere_azimuth"});
  read(q, "radial", c.quadrature.radial, "quadrature");
  read(q, "angular", c.quadrature.angular, "quadrature");
  read(q, "azimuth", c.quadrature.azimuth, "quadrature");
  read(q, "disk_radial", c.quadrature.disk_radial, "quadrature");
  read(q, "disk_angular", c.quadrature.disk_angular, "quadrature");
  read(q, "sphere_polar", c.quadrature.sphere_polar, "quadrature");
  read(q, "sphere_azimuth", c.quadrature.sphere_azimuth, "quadrature");
  const json o = obj(j, "ode");
  check_keys(o, "ode", {"step_factor", "max_dt", "k_max", "n_mc"});
  read(o, "step_factor", c.ode.step_factor, "ode");
  read(o, "max_dt", c.ode.max_dt, "ode");
  read(o, "k_max", c.ode.k_max, "ode");
  read(o, "n_mc", c.ode.n_mc, "ode");
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");
  const json out = obj(j, "output");
  check_keys(out, "output", {"dir", "stride"});
  read(out, "dir", c.output.dir, "output");
  read(out, "stride", c.output.stride, "output");
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

SupportExtent support_extent(const RunConfig& c) {
  SupportExtent s;
  if (c.init.f0 == "bump-maxwellian") {
    const Vec3 ctr = vec(c.init.f0_params, "center", {0.0, 0.0, 0.4});
    const double R = num(c.init.f0_params, "radius", 0.3);
    s.horizontal = std::fmax(std::fabs(ctr[0]), std::fabs(ctr[1])) + R;
    s.height = ctr[2] + R;
  }
  if (c.bc.kind == "inflow" && c.bc.preset == "gaussian") {
    const double c1 = num(c.bc.params, "c1", 0.0), c2 = num(c.bc.params, "c2", 0.0);
    const double w = num(c.bc.params, "width", 0.15);
    s.horizontal = std::fmax(s.horizontal, std::fmax(std::fabs(c1), std::fabs(c2)) + 8.6 * w);
  }
  return s;
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(c.time.T > 0.0 && c.time.T <= 0.5, "time.T must satisfy 0 < T <= 0.5 (got " + std::to_string(c.time.T) + ")");
  need(c.time.n_levels >= 2, "time.n_levels must be at least 2");
  need(c.domain.nx >= 3 && c.domain.ny >= 3 && c.domain.nz >= 3, "domain.nx, ny, nz must be at least 3");
  need(c.domain.Lx > 0.0 && c.domain.Lz > 0.0, "domain.Lx and domain.Lz must be positive");
  need(c.velocity.nv >= 2 && c.velocity.nv % 2 == 0, "velocity.nv must be even (got " + std::to_string(c.velocity.nv) + ")");
  need(c.velocity.vmax > 0.0, "velocity.vmax must be positive");
  need(c.bc.kind == "inflow" || c.bc.kind == "diffuse" || c.bc.kind == "specular",
       "bc.kind must be inflow, diffuse or specular");
  need(c.bc.preset == "zero" || c.bc.preset == "constant" || c.bc.preset == "gaussian",
       "bc.preset must be zero, constant or gaussian");
  need(c.bc.kind == "inflow" || c.bc.preset == "zero", "bc.preset applies to inflow only");
  need(c.bc.preset != "constant", "bc.preset constant has unbounded support and is not runnable; use gaussian");
  need(c.init.f0 == "zero" || c.init.f0 == "bump-maxwellian", "init.f0 must be zero or bump-maxwellian");
  need(c.init.fields == "self-consistent" || c.init.fields == "zero", "init.fields must be self-consistent or zero");
  need(c.init.fields == "self-consistent" || c.init.f0 == "zero",
       "init.fields = zero violates div E0 = 4 pi rho0 for a nonzero f0; use self-consistent");
  need(c.picard.max_iter >= 1, "picard.max_iter must be at least 1");
  need(c.picard.tol > 0.0, "picard.tol must be positive");
  need(c.picard.n_probes >= 1, "picard.n_probes must be positive");
  need(c.output.stride >= 1, "output.stride must be at least 1");
  need(c.ode.step_factor > 0.0 && c.ode.max_dt > 0.0, "ode.step_factor and ode.max_dt must be positive");
  need(c.ode.k_max >= 1 && c.ode.n_mc >= 1, "ode.k_max and ode.n_mc must be positive");
  need(c.threads >= 0, "threads must be >= 0");
  try {
    c.env.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
  const SupportExtent s = support_extent(c);
  const double lx_min = s.horizontal + c.time.T;
  need(c.domain.Lx >= lx_min, "domain.Lx must be at least " + std::to_string(lx_min) +
                                  " (support extent + T, for exact light cones)");
  const double lz_min = s.height + c.time.T;
  need(c.domain.Lz >= lz_min, "domain.Lz must be at least " + std::to_string(lz_min) +
                                  " (T + initial support height, for exact light cones)");
  if (c.init.f0 == "bump-maxwellian") {
    const json& p = c.init.f0_params;
    need(num(p, "radius", 0.3) > 0.0, "init.f0_params.radius must be positive");
    need(num(p, "theta", 0.4) > 0.0, "init.f0_params.theta must be positive");
    need(vec(p, "center", {0, 0, 0.4})[2] >= 0.0, "init.f0_params.center must lie in the half space");
    need(num(p, "grazing_beta", 0.0) >= 0.0, "init.f0_params.grazing_beta must be >= 0");
  }
}

GridSpec make_grid(const RunConfig& c) {
  GridSpec g;
  g.Lx = c.domain.Lx;
  g.Lz = c.domain.Lz;
  g.nx = c.domain.nx;
  g.ny = c.domain.ny;
  g.nz = c.domain.nz;
  g.T = c.time.T;
  g.n_levels = c.time.n_levels;
  return g;
}

Problem make_problem(const RunConfig& c) {
  Problem p;
  p.env = c.env;
  std::shared_ptr<const BumpMaxwellian> bump;
  if (c.init.f0 == "bump-maxwellian") {
    const json& q = c.init.f0_params;
    bump = std::make_shared<BumpMaxwellian>(num(q, "amplitude", 1e-2), vec(q, "center", {0.0, 0.0, 0.4}),
                                            num(q, "radius", 0.3), vec(q, "drift", {0.0, 0.0, 0.0}),
                                            num(q, "theta", 0.4));
    const double beta = num(q, "grazing_beta", 0.0);
    if (beta > 0.0)
      p.f0 = std::make_shared<GrazingBump>(bump, beta, c.env.g);
    else
      p.f0 = bump;
  } else {
    p.f0 = std::make_shared<ZeroDensity>();
  }

  std::vector<std::shared_ptr<const InitialFieldData>> parts;
  if (c.init.fields == "self-consistent" && bump) {
    parts.push_back(std::make_shared<CoulombImageField>(bump->amplitude(), bump->center(), bump->radius()));
  }
  const json& fp = c.init.field_params;
  if (!fp.empty()) {
    parts.push_back(std::make_shared<CurlFields>(num(fp, "eps_e", 0.0), vec(fp, "center_e", {0, 0, 0.5}),
                                                 num(fp, "sigma_e", 0.25), num(fp, "eps_b", 0.0),
                                                 vec(fp, "center_b", {0, 0, 0.5}), num(fp, "sigma_b", 0.25)));
  }
  if (parts.empty())
    p.init = std::make_shared<ZeroInitialFields>();
  else
    p.init = std::make_shared<SumInitialFields>(parts);

  const ClosureKind kind = closure_from_name(c.bc.kind);
  if (kind == ClosureKind::Inflow) {
    if (c.bc.preset == "gaussian") {
      const json& q = c.bc.params;
      p.closure = BoundaryClosure::make_inflow(std::make_shared<GaussianInflow>(
          num(q, "amplitude", 1e-2), num(q, "c1", 0.0), num(q, "c2", 0.0), num(q, "width", 0.15),
          vec(q, "drift", {0.0, 0.0, 0.3}), num(q, "theta", 0.4), num(q, "mod_amp", 0.0), num(q, "mod_freq", 0.0)));
    } else {
      p.closure = BoundaryClosure::make_inflow(nullptr);
    }
  } else if (kind == ClosureKind::Diffuse) {
    p.closure = BoundaryClosure::make_diffuse();
  } else {
    p.closure = BoundaryClosure::make_specular();
  }
  return p;
}

PicardOptions make_picard_options(const RunConfig& c) {
  PicardOptions o;
  o.grid = make_grid(c);
  o.vmax = c.velocity.vmax;
  o.nv = c.velocity.nv;
  o.gs.q.n_radial = c.quadrature.radial;
  o.gs.q.n_polar = c.quadrature.angular;
  o.gs.q.n_azimuth = c.quadrature.azimuth;
  o.gs.q.n_disk_radial = c.quadrature.disk_radial;
  o.gs.q.n_disk_azimuth = c.quadrature.disk_angular;
  o.gs.q.n_sphere_polar = c.quadrature.sphere_polar;
  o.gs.q.n_sphere_azimuth = c.quadrature.sphere_azimuth;
  o.gs.domain = Box{{-c.domain.Lx, -c.domain.Lx, 0.0}, {c.domain.Lx, c.domain.Lx, c.domain.Lz}};
  o.ode.step_factor = c.ode.step_factor;
  o.ode.max_dt = c.ode.max_dt;
  o.eval.seed = c.seed;
  o.eval.k_max = c.ode.k_max;
  o.eval.n_mc = c.ode.n_mc;
  o.tol = c.picard.tol;
  o.max_iter = c.picard.max_iter;
  o.threads = c.threads;
  o.n_probes = static_cast<std::size_t>(c.picard.n_probes);
  o.require_pr = c.picard.require_pr;
  return o;
}

}  // namespace hsvm
