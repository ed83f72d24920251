#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hsvm/characteristics.hpp"
#include "hsvm/gs_fields.hpp"
#include "hsvm/kinetic_weight.hpp"
#include "hsvm/moments.hpp"

namespace hsvm {

struct AuditReport {
  std::string name;
  std::vector<std::pair<std::string, double>> values;
  double residual = 0.0;
  double tolerance = 0.0;
  bool thresholded = true;  // false: reported without a pass criterion
  bool pass = false;
  double at_h = std::numeric_limits<double>::quiet_NaN();
  double at_h2 = std::numeric_limits<double>::quiet_NaN();
  std::string note;

  double value(const std::string& key) const;
};

// Centered differences over interior nodes and interior levels: Ampere, Faraday, Gauss-E, Gauss-B.
// Each residual is compared with rel_tol times the sup of the terms entering it.
std::array<AuditReport, 4> maxwell_residuals(const FieldState& fields, const SourceHistory& hist,
                                             double rel_tol = 0.5);

// Wall sup of |E1|, |E2|, |B3| and one-sided Neumann defects on the grid.
// Dirichlet values are compared with dirichlet_tol; the Neumann defects are reported.
AuditReport conductor_bc_residuals(const FieldState& fields, const SourceHistory& hist, double dirichlet_tol);

// sup over points of |field(q) - field(q refined)|, the scale of the field quadrature error
double quadrature_error_scale(const GsSolver& solver, const SourceModel& src, double t,
                              const std::vector<Vec3>& points);

// Wall sup of |E1|, |E2|, |B3| evaluated directly from the representation, against
// factor times the quadrature error scale.
AuditReport dirichlet_audit(const GsSolver& solver, const SourceModel& src, double t,
                            const std::vector<Vec3>& wall_points, double factor = 10.0);

// Forward-difference defect d3 E3 - 4 pi rho at the wall with steps h and h/2; the defect of a
// first-order stencil should halve, ratio in [lo, hi].
AuditReport neumann_refinement(const GsSolver& solver, const SourceModel& src, const VelocityGrid& vg, double t,
                               const std::vector<Vec3>& wall_points, double h, double lo = 0.35,
                               double hi = 0.65);

// Centered-difference div B at interior points with steps h and h/2; observed order >= min_order.
AuditReport gauss_B_refinement(const GsSolver& solver, const SourceModel& src, double t,
                               const std::vector<Vec3>& points, double h, double min_order = 1.5);

struct EnergySeries {
  std::vector<double> t;
  std::vector<double> field;     // int (|E|^2 + |B|^2) / 2 over the grid box
  std::vector<double> kinetic;   // int int <v> f
  std::vector<double> JE;        // int J . E
  std::vector<double> J3;        // int J3
  std::vector<double> poynting;  // outflow of E x B through the faces other than the wall
};

// Kinetic integrals use a Gauss-Legendre product rule of order n_space over the support box.
EnergySeries energy_series(const FieldState& fields, const PhaseDensity& f, const VelocityGrid& vg,
                           int n_space = 10, int threads = 1);

// d/dt [W + 4 pi K] = 4 pi Ee int J3 - 4 pi g int J3 - P in integrated form; relative defect
// against the total variation of the terms. With thresholded = false the defect is only reported.
AuditReport energy_balance(const EnergySeries& s, const Environment& env, double tol = 0.05,
                           bool thresholded = true);

// int f vhat3 dv at wall points and times, and the drift of int int f dv dx over [0, T].
struct MassFluxOptions {
  int n_space = 10;
  int n_times = 5;
  double flux_tol = 0.0;  // absolute tolerance on |flux|
  // extra absolute tolerance at a wall point, e.g. the measured interpolation error of a tabulated closure
  std::function<double(double t, double x1, double x2)> pointwise_tol;
  double mass_tol = 0.01;
  int threads = 1;
};
AuditReport mass_flux_audit(const PhaseDensity& f, ClosureKind closure, const VelocityGrid& vg, double T,
                            const std::vector<std::pair<double, double>>& wall_points,
                            const MassFluxOptions& opt);

// int f dv dx via a Gauss-Legendre product rule over the support box
double total_mass(const PhaseDensity& f, double t, const VelocityGrid& vg, int n_space = 10, int threads = 1);

struct DerivativeSample {
  double dx_par = 0.0;  // |grad_x|| f|
  double dx3 = 0.0;     // |d_x3 f|
  double dv = 0.0;      // |grad_v f|
  double alpha = 0.0;
  double jv = 1.0;
};

// Central differences of f at a phase point (steps hx for x, hv for v).
DerivativeSample derivative_sample(const PhaseDensity& f, double t, const Vec3& x, const Vec3& v, double hx,
                                   double hv, const WeightContext& ctx);

// sup of <v>^{4+d}|grad_x|| f|, <v>^{5+d} alpha |d_x3 f|, <v>^{5+d}|grad_v f| on probes with |v3| >= 1e-3.
AuditReport weighted_derivative_audit(const PhaseDensity& f, const std::vector<std::pair<double, PhasePoint>>& probes,
                                      const WeightContext& ctx, double hx = 1e-4, double hv = 1e-4);

// Probes (t, (x||, x3_k), v) for a decreasing family x3_k: unweighted |d_x3 f| must grow by
// min_growth while <v>^{5+d} alpha |d_x3 f| stays within max_spread.
AuditReport gamma0_approach(const PhaseDensity& f, double t, double x1, double x2, const Vec3& v,
                            const std::vector<double>& x3s, const WeightContext& ctx, double min_growth = 5.0,
                            double max_spread = 2.0);

}  // namespace hsvm
