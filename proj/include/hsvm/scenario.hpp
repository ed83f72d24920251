#pragma once

#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsvm/config.hpp"
#include "hsvm/diagnostics.hpp"

namespace hsvm {

// An error raised while running one named stage of a scenario.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage(std::move(stage)) {}
  std::string stage;
};

json audit_to_json(const AuditReport& r);
json sweep_to_json(const SweepRecord& r);

// t,x1,x2,x3,E1,E2,E3,B1,B2,B3,rho,J1,J2,J3 with 17 significant digits, rows lexicographic in (x1,x2,x3)
void write_snapshot(std::ostream& os, const FieldState& fields, const SourceHistory& hist, int level);
const char* snapshot_header();

// reads a snapshot written by write_snapshot back into level `level` of the given containers
void read_snapshot(std::istream& is, FieldState& fields, std::vector<Moments>& moments, int level);

struct RunSummary {
  ConvergenceReport convergence;
  std::vector<AuditReport> audits;
  std::string out_dir;
};

// |table - direct outgoing flux of f^{l-1}| at a wall point: the interpolation error of the lagged diffuse
// closure, which the flux audit adds to its tolerance (empty for other closures)
std::function<double(double, double, double)> closure_interpolation_error(const IterationState& st,
                                                                          const VelocityGrid& vg);

// Picard run, snapshots, convergence.jsonl, audits.jsonl and the resolved config.json under c.output.dir.
RunSummary run_scenario(const RunConfig& c, std::ostream* log = nullptr);

// Grid audits recomputed from a run directory's config.json and snapshots.
std::vector<AuditReport> audit_run_dir(const std::string& dir);

}  // namespace hsvm
