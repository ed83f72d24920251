#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsvm/characteristics.hpp"
#include "hsvm/gs_fields.hpp"
#include "hsvm/moments.hpp"

namespace hsvm {

// Static inputs of one run.
struct Problem {
  Environment env;
  BoundaryClosure closure;
  std::shared_ptr<const InitialDensity> f0;
  std::shared_ptr<const InitialFieldData> init;
};

struct PicardOptions {
  GridSpec grid;
  double vmax = 6.0;
  int nv = 16;
  GsOptions gs;
  OdeOptions ode;
  EvalOptions eval;
  double tol = 1e-4;  // relative
  int max_iter = 8;
  int threads = 1;
  std::size_t n_probes = 512;
  bool require_pr = false;  // refuse to start when the sign-condition margin is not positive
  int wall_refine = 4;       // the lagged diffuse flux table refines the wall grid and time levels by this factor
};

struct IterationState {
  int ell = 0;
  std::shared_ptr<const FieldState> fields_prev;  // E^{l-1}, B^{l-1}
  std::shared_ptr<const FieldState> fields;       // E^l, B^l
  std::shared_ptr<const PhaseDensity> f;          // f^l
  std::shared_ptr<const FieldEvaluator> transport;  // frozen field used by f^l
  std::shared_ptr<const SourceHistory> hist;        // rho^l, J^l
  std::shared_ptr<const PhaseDensity> f_prev;       // f^{l-1}
  std::shared_ptr<const WallFluxTable> wall_flux;   // lagged diffuse flux of f^{l-1} (diffuse closure only)
};

struct SweepRecord {
  int iter = 0;
  double dE_sup = 0.0;
  double dB_sup = 0.0;
  double df_probe_sup = 0.0;  // weighted by <v>^{4+delta}
  double rel = 0.0;           // max of the three, each relative to its own scale
  double ratio = std::numeric_limits<double>::quiet_NaN();  // rel_l / rel_{l-1}, from iteration 2 on
  double E_sup = 0.0;
  double B_sup = 0.0;
  double f_probe_sup = 0.0;
  std::uint64_t grazing = 0;
  std::uint64_t truncated = 0;
};

struct ConvergenceReport {
  std::vector<SweepRecord> sweeps;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  double pr_margin = 0.0;
  // geometric mean of the recorded ratios (NaN with fewer than two sweeps)
  double contraction() const;
  double max_ratio() const;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, ConvergenceReport rep) : std::runtime_error(what), report(std::move(rep)) {}
  ConvergenceReport report;
};

struct ProbePoint {
  double t;
  Vec3 x;
  Vec3 v;
};

class Picard {
 public:
  Picard(Problem problem, PicardOptions opt);

  using SweepCallback = std::function<void(const SweepRecord&, const IterationState&)>;
  ConvergenceReport run(const SweepCallback& on_sweep = {});

  // one transport + field rebuild from `s` (does not touch the stored state)
  IterationState iterate_once(const IterationState& s) const;
  SweepRecord compare(const IterationState& next, const IterationState& prev) const;

  const IterationState& initial() const { return init_state_; }
  const IterationState& state() const { return state_; }
  const Problem& problem() const { return problem_; }
  const PicardOptions& options() const { return opt_; }
  const GsSolver& solver() const { return *solver_; }
  const VelocityGrid& velocity_grid() const { return solver_->velocity_grid(); }
  const std::vector<ProbePoint>& probes() const { return probes_; }

 private:
  Problem problem_;
  PicardOptions opt_;
  std::shared_ptr<GsSolver> solver_;
  std::vector<ProbePoint> probes_;
  IterationState init_state_;
  IterationState state_;
};

// Quasi-random phase points in the box x [0, T] x {|v| <= vmax}.
std::vector<ProbePoint> make_probes(const Box& box, double T, double vmax, std::size_t n);

}  // namespace hsvm
