#pragma once

#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "hsvm/core_model.hpp"
#include "hsvm/distributions.hpp"
#include "hsvm/fields.hpp"
#include "hsvm/initial_fields.hpp"
#include "hsvm/moments.hpp"

namespace hsvm {

// Velocity kernels of the retarded field representation. d = 1 + vhat.omega throughout.
namespace kernel {
// (|vhat|^2 - 1)(vhat_i + omega_i) / d^2
Vec3 bulk_E(const Vec3& v, const Vec3& omega);
// (omega x vhat)(1 - |vhat|^2) / d^2
Vec3 bulk_B(const Vec3& v, const Vec3& omega);
// row i is grad_v [(omega_i + vhat_i) / d]
void S_E(const Vec3& v, const Vec3& omega, Vec3 rows[3]);
// row i is grad_v [(omega x vhat)_i / d]
void S_B(const Vec3& v, const Vec3& omega, Vec3 rows[3]);
// (omega_i - vhat_i (omega.vhat)) / d, the initial-sphere electric kernel
Vec3 sphere_E(const Vec3& v, const Vec3& omega);
// (omega x vhat) / d
Vec3 sphere_B(const Vec3& v, const Vec3& omega);
}  // namespace kernel

struct KernelBoundReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max over checks of lhs / rhs
  const char* worst_check = "";
};

// Random (v, omega) pairs with log-uniform |v| and half of omega concentrated near -vhat.
KernelBoundReport kernel_bound_audit(std::size_t n, std::uint64_t seed);

class LightConeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GsQuadrature {
  int n_radial = 4;
  int n_polar = 3;   // per side of the wall cut
  int n_azimuth = 8;
  int n_disk_radial = 6;
  int n_disk_azimuth = 12;
  int n_sphere_polar = 6;
  int n_sphere_azimuth = 12;

  GsQuadrature refined() const;
  void validate() const;
};

struct GsOptions {
  GsQuadrature q;
  double neumann_sign = 1.0;  // the wall Neumann contribution to E3 is scaled by this
  Box domain = Box::none();   // when non-empty, the source support must stay inside it
};

// The density entering the field at the current sweep and the field transporting it.
struct SourceModel {
  const PhaseDensity* f = nullptr;
  const FieldEvaluator* force = nullptr;
  Environment env;
};

// Contribution groups; total() is the field.
struct GsTerms {
  FieldSample data;     // initial fields propagated (Kirchhoff)
  FieldSample sphere;   // initial density on the light cone
  FieldSample bulk;     // T-kernel volume terms
  FieldSample sterm;    // S-kernel volume terms
  FieldSample wall;     // wall traces including the image parts
  FieldSample neumann;  // Neumann wall contribution (E3 and B1, B2)
  FieldSample total() const;
};

class GsSolver {
 public:
  GsSolver(std::shared_ptr<const InitialFieldData> init, std::shared_ptr<const InitialDensity> f0,
           VelocityGrid vg, GsOptions opt);

  GsTerms eval_terms(double t, const Vec3& x, const SourceModel& src) const;
  FieldSample eval(double t, const Vec3& x, const SourceModel& src) const { return eval_terms(t, x, src).total(); }

  const GsOptions& options() const { return opt_; }
  GsSolver with_quadrature(const GsQuadrature& q) const {
    GsOptions o = opt_;
    o.q = q;
    return GsSolver(init_, f0_, vg_, o);
  }
  const VelocityGrid& velocity_grid() const { return vg_; }
  const InitialFieldData& initial_fields() const { return *init_; }
  const InitialDensity& initial_density() const { return *f0_; }

  // current density of f0 at a point (for the time derivative of E0)
  Vec3 initial_current(const Vec3& y) const;

 private:
  void add_data(double t, const Vec3& x, GsTerms& out) const;
  void add_sphere(double t, const Vec3& x, GsTerms& out) const;
  void add_ball(double t, const Vec3& x, const SourceModel& src, GsTerms& out) const;
  void add_wall(double t, const Vec3& x, const SourceModel& src, GsTerms& out) const;

  std::shared_ptr<const InitialFieldData> init_;
  std::shared_ptr<const InitialDensity> f0_;
  VelocityGrid vg_;
  GsOptions opt_;
};

// Neumann wall integral -2 int_{x3}^{t} dr int_0^{2 pi} dphi rho(t - r, x|| + sqrt(r^2 - x3^2) e_phi).
double neumann_boundary_term(double t, const Vec3& x, const ScalarTrace& rho_wall, int n_radial = 16,
                             int n_azimuth = 32);

// Fields of a solver on every node and level; level 0 holds E0, B0.
FieldState tabulate_fields(const GsSolver& solver, const SourceModel& src, const GridSpec& grid, int threads = 1);

}  // namespace hsvm
