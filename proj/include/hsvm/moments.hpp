#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hsvm/distributions.hpp"
#include "hsvm/fields.hpp"

namespace hsvm {

// Product Gauss-Legendre rule on [-vmax, vmax]^3.
struct VelocityGrid {
  double vmax = 6.0;
  int nv = 16;
  std::vector<Vec3> v;
  std::vector<Vec3> vhat;
  std::vector<double> jv;
  std::vector<double> w;
  double tail_integral = 0.0;  // int_{|v| > vmax} <v>^{-4-delta} dv

  static VelocityGrid make(double vmax, int nv, double delta = 0.5);
  std::size_t size() const { return v.size(); }
  // bound on the truncation error of int f dv given sup |<v>^{4+delta} f|
  double tail_bound(double sup_weighted) const { return sup_weighted * tail_integral; }
};

struct Moments {
  double rho = 0.0;
  Vec3 J;
};

class QuadratureFailure : public std::runtime_error {
 public:
  QuadratureFailure(const std::string& what, Vec3 node) : std::runtime_error(what), node(node) {}
  Vec3 node;
};

// rho = int f dv, J = int vhat f dv
Moments compute_moments(const PhaseDensity& f, double t, const Vec3& x, const VelocityGrid& vg);

// rho, J on every node and level of a grid; rows of 4 doubles (rho, J1, J2, J3).
class SourceHistory {
 public:
  SourceHistory() = default;
  explicit SourceHistory(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  int levels_filled() const { return filled_; }
  Moments get(int level, std::size_t node) const;
  Moments boundary(int level, int i, int j) const { return get(level, grid_.index(i, j, 0)); }
  // levels are appended in order
  void append_level(const std::vector<Moments>& values);
  // linear interpolation in time, trilinear in space (clamped)
  Moments at(double t, const Vec3& x) const;

 private:
  GridSpec grid_;
  std::vector<double> data_;
  int filled_ = 0;
};

SourceHistory tabulate_sources(const PhaseDensity& f, const GridSpec& grid, const VelocityGrid& vg,
                               int threads = 1);

struct ContinuityResidual {
  double sup = 0.0;
  double l2 = 0.0;  // root mean square over interior nodes and levels
  std::size_t count = 0;
};

// Centered differences of d_t rho + div J over interior nodes and levels.
ContinuityResidual continuity_residual(const SourceHistory& hist);

// Outgoing wall flux int_{u3 < 0} f(t, x||, 0, u) |uhat3| du on the wall nodes of a grid.
class WallFluxTable {
 public:
  WallFluxTable() = default;
  static WallFluxTable tabulate(const PhaseDensity& f, const GridSpec& grid, const VelocityGrid& vg,
                                int threads = 1);
  double at(double t, double x1, double x2) const;
  double get(int level, int i, int j) const {
    return data_[(static_cast<std::size_t>(level) * grid_.nx + i) * grid_.ny + j];
  }
  const GridSpec& grid() const { return grid_; }

 private:
  double at_level(int level, double x1, double x2) const;
  GridSpec grid_;
  std::vector<double> data_;
};

double outgoing_wall_flux(const PhaseDensity& f, double t, double x1, double x2, const VelocityGrid& vg);
// int f vhat3 dv on the wall (net flux into the half space is positive)
double net_wall_flux(const PhaseDensity& f, double t, double x1, double x2, const VelocityGrid& vg);

}  // namespace hsvm
