#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hsvm/picard.hpp"

namespace hsvm {

using json = nlohmann::json;

struct DomainConfig {
  double Lx = 1.5;
  double Lz = 1.25;
  int nx = 12, ny = 12, nz = 10;
  bool operator==(const DomainConfig&) const = default;
};

struct VelocityConfig {
  double vmax = 6.0;
  int nv = 16;
  bool operator==(const VelocityConfig&) const = default;
};

struct TimeConfig {
  double T = 0.1;
  int n_levels = 32;
  bool operator==(const TimeConfig&) const = default;
};

struct BcConfig {
  std::string kind = "inflow";  // inflow | diffuse | specular
  std::string preset = "zero";  // inflow data: zero | constant | gaussian
  json params = json::object();
  bool operator==(const BcConfig&) const = default;
};

struct InitConfig {
  std::string f0 = "zero";  // zero | bump-maxwellian
  json f0_params = json::object();
  std::string fields = "self-consistent";  // self-consistent | zero
  json field_params = json::object();       // optional curl parts: eps_e, center_e, sigma_e, eps_b, center_b, sigma_b
  bool operator==(const InitConfig&) const = default;
};

struct PicardConfig {
  int max_iter = 8;
  double tol = 1e-4;
  int n_probes = 512;
  bool require_pr = false;
  bool operator==(const PicardConfig&) const = default;
};

struct QuadratureConfig {
  int radial = 4;
  int angular = 3;  // polar nodes per side of the wall cut
  int azimuth = 8;
  int disk_radial = 6;
  int disk_angular = 12;
  int sphere_polar = 6;
  int sphere_azimuth = 12;
  bool operator==(const QuadratureConfig&) const = default;
};

struct OdeConfig {
  double step_factor = 1e-2;
  double max_dt = 1e-2;
  int k_max = 16;
  int n_mc = 64;
  bool operator==(const OdeConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  int stride = 1;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  std::string name = "custom";
  DomainConfig domain;
  VelocityConfig velocity;
  TimeConfig time;
  Environment env;
  BcConfig bc;
  InitConfig init;
  PicardConfig picard;
  QuadratureConfig quadrature;
  OdeConfig ode;
  std::uint64_t seed = 0;
  int threads = 0;
  OutputConfig output;

  bool operator==(const RunConfig& o) const;
};

json to_json(const RunConfig& c);
// defaults are filled for missing keys; unknown keys are rejected
RunConfig config_from_json(const json& j);
RunConfig load_config(const std::string& path);
// throws ConfigError naming the offending field
void validate(const RunConfig& c);

// builders
Problem make_problem(const RunConfig& c);
PicardOptions make_picard_options(const RunConfig& c);
GridSpec make_grid(const RunConfig& c);

// horizontal extent and height of the initial and inflow supports
struct SupportExtent {
  double horizontal = 0.0;
  double height = 0.0;
};
SupportExtent support_extent(const RunConfig& c);

}  // namespace hsvm
