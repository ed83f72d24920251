#include "hsvm/presets.hpp"

namespace hsvm {

namespace {

// Smoke scale shared by the presets: a few minutes on one core.
RunConfig smoke() {
  RunConfig c;
  c.domain = {0.8, 0.8, 7, 7, 5};
  c.velocity = {2.0, 10};
  c.time = {0.1, 5};
  c.quadrature = {3, 2, 6, 4, 8, 4, 8};
  c.ode.step_factor = 0.05;
  c.ode.max_dt = 0.025;
  c.picard.n_probes = 256;
  c.picard.tol = 1e-4;
  c.picard.max_iter = 6;
  return c;
}

json bump(double amp, Vec3 c, double R, Vec3 u, double th) {
  return {{"amplitude", amp}, {"center", {c[0], c[1], c[2]}}, {"radius", R}, {"drift", {u[0], u[1], u[2]}}, {"theta", th}};
}

}  // namespace

std::vector<std::string> list_presets() {
  return {"inflow-gaussian", "diffuse-relax", "specular-billiard", "vacuum-wave", "free-stream"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig c = smoke();
  c.name = name;
  c.output.dir = "out/" + name;
  if (name == "inflow-gaussian") {
    c.env.g = 1.0;
    c.env.Ee = 0.2;
    c.env.Be = 0.1;
    c.bc.kind = "inflow";
    c.bc.preset = "gaussian";
    c.bc.params = {{"amplitude", 1e-2}, {"c1", 0.0},     {"c2", 0.0},       {"width", 0.08},
                   {"drift", {0.0, 0.0, 0.3}}, {"theta", 0.4}, {"mod_amp", 0.2}, {"mod_freq", 20.0}};
    c.init.f0 = "bump-maxwellian";
    c.init.f0_params = bump(1e-2, {0.0, 0.0, 0.35}, 0.25, {0.0, 0.0, 0.0}, 0.4);
    c.domain.Lx = 0.8;
    c.picard.require_pr = true;
  } else if (name == "diffuse-relax") {
    c.env.g = 0.5;
    c.bc.kind = "diffuse";
    c.init.f0 = "bump-maxwellian";
    c.init.f0_params = bump(1e-2, {0.0, 0.0, 0.3}, 0.25, {0.0, 0.0, -0.5}, 0.7);
    // the re-emitted Maxwellian has unit temperature
    c.velocity = {4.0, 12};
    c.picard.require_pr = true;
  } else if (name == "specular-billiard") {
    c.env.g = 1.0;
    c.bc.kind = "specular";
    c.init.f0 = "bump-maxwellian";
    c.init.f0_params = bump(1e-2, {0.0, 0.0, 0.3}, 0.25, {0.2, 0.0, -0.4}, 0.4);
    c.init.f0_params["grazing_beta"] = 0.05;
    c.picard.require_pr = true;
  } else if (name == "vacuum-wave") {
    c.bc.kind = "inflow";
    c.init.f0 = "zero";
    c.init.fields = "self-consistent";
    c.init.field_params = {{"eps_e", 0.05}, {"center_e", {0.0, 0.0, 0.4}}, {"sigma_e", 0.15},
                           {"eps_b", 0.05}, {"center_b", {0.1, 0.0, 0.4}}, {"sigma_b", 0.15}};
  } else if (name == "free-stream") {
    c.bc.kind = "inflow";
    c.init.f0 = "bump-maxwellian";
    c.init.f0_params = bump(1e-6, {0.0, 0.0, 0.4}, 0.25, {0.3, 0.0, 0.0}, 0.4);
  } else {
    throw ConfigError("unknown preset '" + name + "'; run `hsvm presets` for the list");
  }
  validate(c);
  return c;
}

json describe_preset(const std::string& name) {
  const RunConfig c = preset_config(name);
  json d;
  d["name"] = name;
  d["config"] = to_json(c);
  json p = json::object();
  p["env.g"] = "gravity along -e3; the sign-condition margin is g - Ee - E3 - (vhat x B)3 on the wall";
  p["env.Ee"] = "ambient vertical electric field";
  p["env.Be"] = "ambient vertical magnetic field";
  p["time.T"] = "final time, at most 0.5";
  if (name == "inflow-gaussian") {
    d["description"] = "Gaussian wall inflow with a time modulation into a small bump plasma; inflow closure";
    p["bc.params.amplitude"] = "inflow amplitude";
    p["bc.params.width"] = "horizontal Gaussian width of the inflow spot";
    p["bc.params.drift"] = "mean velocity of the injected Maxwellian";
    p["bc.params.mod_amp"] = "relative amplitude of the sin(mod_freq t) modulation";
  } else if (name == "diffuse-relax") {
    d["description"] = "bump plasma drifting into a diffusely re-emitting wall at unit wall temperature";
    p["init.f0_params.drift"] = "initial mean velocity (negative v3 drives particles into the wall)";
  } else if (name == "specular-billiard") {
    d["description"] = "bump plasma falling onto a specular wall; f0 vanishes to infinite order at grazing";
    p["init.f0_params.grazing_beta"] =
        "gamma0 decay: f0 carries the factor exp(-grazing_beta / sqrt(alpha0 <v>)), "
        "alpha0^2 = x3^2 + vhat3^2 + 2 g x3 / <v>, renormalized so rho0 is the bump density";
  } else if (name == "vacuum-wave") {
    d["description"] = "divergence-free initial fields in vacuum above the conductor; field-only oracle scenario";
    p["init.field_params.eps_e"] = "amplitude of E0 = eps_e curl(0, 0, x3 G)";
    p["init.field_params.eps_b"] = "amplitude of B0 = eps_b curl(0, 0, G)";
  } else {
    d["description"] = "weakly charged bump without gravity; characteristics are nearly straight lines";
    p["init.f0_params.amplitude"] = "bump amplitude (tiny, so self-fields are negligible)";
  }
  d["parameters"] = p;
  return d;
}

}  // namespace hsvm
