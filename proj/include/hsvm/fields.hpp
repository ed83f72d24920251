#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "hsvm/vec3.hpp"

namespace hsvm {

struct FieldSample {
  Vec3 E;
  Vec3 B;
};

// Frozen electromagnetic field of one sweep, (t, x) -> (E, B).
class FieldEvaluator {
 public:
  virtual ~FieldEvaluator() = default;
  virtual FieldSample at(double t, const Vec3& x) const = 0;
};

class ZeroField final : public FieldEvaluator {
 public:
  FieldSample at(double, const Vec3&) const override { return {}; }
};

class UniformField final : public FieldEvaluator {
 public:
  UniformField(Vec3 E, Vec3 B) : s_{E, B} {}
  FieldSample at(double, const Vec3&) const override { return s_; }

 private:
  FieldSample s_;
};

class AnalyticField final : public FieldEvaluator {
 public:
  using Fn = std::function<FieldSample(double, const Vec3&)>;
  explicit AnalyticField(Fn fn) : fn_(std::move(fn)) {}
  FieldSample at(double t, const Vec3& x) const override { return fn_(t, x); }

 private:
  Fn fn_;
};

// Uniform grid over [-Lx, Lx]^2 x [0, Lz] with n_levels uniform time levels on [0, T].
struct GridSpec {
  double Lx = 1.5;
  double Lz = 1.25;
  int nx = 12;
  int ny = 12;
  int nz = 10;
  double T = 0.1;
  int n_levels = 32;

  std::size_t nodes() const { return static_cast<std::size_t>(nx) * ny * nz; }
  double hx() const { return 2.0 * Lx / (nx - 1); }
  double hy() const { return 2.0 * Lx / (ny - 1); }
  double hz() const { return Lz / (nz - 1); }
  double dt() const { return n_levels > 1 ? T / (n_levels - 1) : 0.0; }
  double time(int level) const { return level * dt(); }
  // row-major with x3 fastest: lexicographic in (x1, x2, x3)
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * ny + j) * nz + k;
  }
  Vec3 node(int i, int j, int k) const {
    return {-Lx + i * hx(), -Lx + j * hy(), k * hz()};
  }
  Vec3 node(std::size_t idx) const;
  void validate() const;
};

// E, B on every grid node and time level.
class FieldState {
 public:
  FieldState() = default;
  explicit FieldState(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  FieldSample get(int level, std::size_t node) const;
  void set(int level, std::size_t node, const FieldSample& s);
  // trace on the wall plane k = 0
  FieldSample boundary(int level, int i, int j) const { return get(level, grid_.index(i, j, 0)); }

  // sup over all nodes/levels of |E|_inf and |B|_inf
  double sup_E() const;
  double sup_B() const;
  // sup over nodes/levels of componentwise differences
  static double sup_diff_E(const FieldState& a, const FieldState& b);
  static double sup_diff_B(const FieldState& a, const FieldState& b);

  const std::vector<double>& raw() const { return data_; }

 private:
  GridSpec grid_;
  std::vector<double> data_;  // level-major, 6 doubles per node
};

// Trilinear in space, linear in time; level 0 for t < 0, clamped at the box faces.
class GridFieldEvaluator final : public FieldEvaluator {
 public:
  explicit GridFieldEvaluator(std::shared_ptr<const FieldState> state) : state_(std::move(state)) {}
  FieldSample at(double t, const Vec3& x) const override;
  const FieldState& state() const { return *state_; }

 private:
  FieldSample at_level(int level, const Vec3& x) const;
  std::shared_ptr<const FieldState> state_;
};

// Samples an evaluator onto a grid.
FieldState sample_field(const GridSpec& grid, const FieldEvaluator& f);

}  // namespace hsvm
