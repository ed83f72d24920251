#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsvm/vec3.hpp"

namespace hsvm {

// Code units: c = m = e = 1 (one species).
struct Environment {
  static constexpr double c = 1.0;
  static constexpr double mass = 1.0;
  static constexpr double charge = 1.0;

  double g = 0.0;   // gravity, acts along -e3
  double Ee = 0.0;  // ambient vertical electric field
  double Be = 0.0;  // ambient vertical magnetic field
  double delta = 0.5;

  void validate() const;
};

struct PhasePoint {
  Vec3 x;
  Vec3 v;
};

// Time-ordered samples of one characteristic (s, X(s), V(s)).
struct TrajectorySample {
  double s = 0.0;
  Vec3 x;
  Vec3 v;
};
using Trajectory = std::vector<TrajectorySample>;

enum class BoundaryStratum { Incoming, Outgoing, Grazing };

// Classification of a wall phase point; v3 > 0 enters the half space.
BoundaryStratum stratum_of(const Vec3& v);
const char* stratum_name(BoundaryStratum s);

inline double jbracket(const Vec3& v) { return std::sqrt(1.0 + norm2(v)); }

Vec3 rel_velocity(const Vec3& v);

Vec3 lorentz_force(const Vec3& E, const Vec3& B, const Vec3& v, const Environment& env);

// 1 + vhat.omega for unit omega, evaluated without cancellation near vhat = -omega.
double one_plus_vhat_dot(const Vec3& v, const Vec3& omega);

struct PrSample {
  double t = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  Vec3 v;
};

struct PrReport {
  double margin = 0.0;  // empirical c0 when positive
  bool ok = false;
  std::size_t samples = 0;
  std::vector<PrSample> violations;
  std::string message;
};

using ScalarTrace = std::function<double(double t, double x1, double x2)>;
using VectorTrace = std::function<Vec3(double t, double x1, double x2)>;

// inf over samples of g - Ee - E3(t,x||,0) - (vhat x B)_3(t,x||,0)
PrReport pr_condition_check(const Environment& env, const ScalarTrace& boundary_E3,
                            const VectorTrace& boundary_B, const std::vector<PrSample>& samples);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hsvm
