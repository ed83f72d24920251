#include "hsvm/core_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hsvm {

void Environment::validate() const {
  if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("env.g must be finite and >= 0");
  if (!std::isfinite(Ee) || !std::isfinite(Be)) throw ConfigError("env.Ee and env.Be must be finite");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("env.delta must lie in (0, 1]");
}

BoundaryStratum stratum_of(const Vec3& v) {
  if (v[2] > 0.0) return BoundaryStratum::Incoming;
  if (v[2] < 0.0) return BoundaryStratum::Outgoing;
  return BoundaryStratum::Grazing;
}

const char* stratum_name(BoundaryStratum s) {
  switch (s) {
    case BoundaryStratum::Incoming: return "gamma_minus";
    case BoundaryStratum::Outgoing: return "gamma_plus";
    case BoundaryStratum::Grazing: return "gamma_zero";
  }
  return "?";
}

Vec3 rel_velocity(const Vec3& v) { return v / jbracket(v); }

Vec3 lorentz_force(const Vec3& E, const Vec3& B, const Vec3& v, const Environment& env) {
  const Vec3 vh = rel_velocity(v);
  const Vec3 Btot = B + Vec3{0.0, 0.0, env.Be};
  Vec3 F = E + cross(vh, Btot);
  F[2] += env.Ee - env.g;
  return F;
}

double one_plus_vhat_dot(const Vec3& v, const Vec3& omega) {
  const double jv = jbracket(v);
  const double vo = dot(v, omega);
  if (vo >= 0.0) return 1.0 + vo / jv;
  // <v> + v.w = (1 + |v x w|^2) / (<v> - v.w) for |w| = 1
  const double c2 = norm2(cross(v, omega));
  return (1.0 + c2) / (jv * (jv - vo));
}

PrReport pr_condition_check(const Environment& env, const ScalarTrace& boundary_E3,
                            const VectorTrace& boundary_B, const std::vector<PrSample>& samples) {
  PrReport rep;
  rep.samples = samples.size();
  rep.margin = std::numeric_limits<double>::infinity();
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) {
    const Vec3 vh = rel_velocity(s.v);
    const Vec3 B = boundary_B(s.t, s.x1, s.x2);
    const double vxb3 = vh[0] * B[1] - vh[1] * B[0];
    const double m = env.g - env.Ee - boundary_E3(s.t, s.x1, s.x2) - vxb3;
    values.push_back(m);
    if (m < rep.margin) rep.margin = m;
  }
  if (samples.empty()) rep.margin = env.g - env.Ee;
  for (std::size_t k = 0; k < samples.size(); ++k)
    if (values[k] <= 0.0) rep.violations.push_back(samples[k]);
  rep.ok = rep.margin > 0.0;
  std::ostringstream os;
  if (rep.ok) {
    os << "sign condition holds, c0 = " << rep.margin;
  } else {
    os << "sign condition violated (margin " << rep.margin << ", " << rep.violations.size()
       << " samples); weighted diagnostics are unusable";
  }
  rep.message = os.str();
  return rep;
}

}  // namespace hsvm
