#include "hsvm/fields.hpp"

#include <algorithm>
#include <cmath>

#include "hsvm/core_model.hpp"

namespace hsvm {

Vec3 GridSpec::node(std::size_t idx) const {
  const int k = static_cast<int>(idx % nz);
  const int j = static_cast<int>((idx / nz) % ny);
  const int i = static_cast<int>(idx / (static_cast<std::size_t>(nz) * ny));
  return node(i, j, k);
}

void GridSpec::validate() const {
  if (nx < 2 || ny < 2 || nz < 2) throw ConfigError("domain: nx, ny, nz must be >= 2");
  if (!(Lx > 0.0) || !(Lz > 0.0)) throw ConfigError("domain: Lx and Lz must be positive");
  if (!(T > 0.0)) throw ConfigError("time.T must be positive");
  if (n_levels < 2) throw ConfigError("time.n_levels must be >= 2");
}

FieldState::FieldState(const GridSpec& grid)
    : grid_(grid), data_(grid.nodes() * static_cast<std::size_t>(grid.n_levels) * 6, 0.0) {}

FieldSample FieldState::get(int level, std::size_t node) const {
  const double* p = &data_[(static_cast<std::size_t>(level) * grid_.nodes() + node) * 6];
  return {{p[0], p[1], p[2]}, {p[3], p[4], p[5]}};
}

void FieldState::set(int level, std::size_t node, const FieldSample& s) {
  double* p = &data_[(static_cast<std::size_t>(level) * grid_.nodes() + node) * 6];
  for (int c = 0; c < 3; ++c) {
    p[c] = s.E[c];
    p[3 + c] = s.B[c];
  }
}

namespace {
double sup_part(const std::vector<double>& d, int off) {
  double m = 0.0;
  for (std::size_t n = 0; n < d.size(); n += 6)
    for (int c = 0; c < 3; ++c) m = std::max(m, std::fabs(d[n + off + c]));
  return m;
}
double sup_diff_part(const std::vector<double>& a, const std::vector<double>& b, int off) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); n += 6)
    for (int c = 0; c < 3; ++c) m = std::max(m, std::fabs(a[n + off + c] - b[n + off + c]));
  return m;
}
}  // namespace

double FieldState::sup_E() const { return sup_part(data_, 0); }
double FieldState::sup_B() const { return sup_part(data_, 3); }
double FieldState::sup_diff_E(const FieldState& a, const FieldState& b) {
  return sup_diff_part(a.data_, b.data_, 0);
}
double FieldState::sup_diff_B(const FieldState& a, const FieldState& b) {
  return sup_diff_part(a.data_, b.data_, 3);
}

FieldSample GridFieldEvaluator::at_level(int level, const Vec3& x) const {
  const GridSpec& g = state_->grid();
  const double h[3] = {g.hx(), g.hy(), g.hz()};
  const double lo[3] = {-g.Lx, -g.Lx, 0.0};
  const int n[3] = {g.nx, g.ny, g.nz};
  int i0[3];
  double fr[3];
  for (int a = 0; a < 3; ++a) {
    double s = (x[a] - lo[a]) / h[a];
    s = std::clamp(s, 0.0, static_cast<double>(n[a] - 1));
    int i = static_cast<int>(std::floor(s));
    if (i >= n[a] - 1) i = n[a] - 2;
    i0[a] = i;
    fr[a] = s - i;
  }
  FieldSample out;
  for (int c = 0; c < 8; ++c) {
    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double w = (di ? fr[0] : 1.0 - fr[0]) * (dj ? fr[1] : 1.0 - fr[1]) * (dk ? fr[2] : 1.0 - fr[2]);
    if (w == 0.0) continue;
    const FieldSample s = state_->get(level, g.index(i0[0] + di, i0[1] + dj, i0[2] + dk));
    out.E += w * s.E;
    out.B += w * s.B;
  }
  return out;
}

FieldSample GridFieldEvaluator::at(double t, const Vec3& x) const {
  const GridSpec& g = state_->grid();
  if (t <= 0.0) return at_level(0, x);
  const double s = t / g.dt();
  if (s >= g.n_levels - 1) return at_level(g.n_levels - 1, x);
  const int l = static_cast<int>(std::floor(s));
  const double fr = s - l;
  const FieldSample a = at_level(l, x);
  if (fr == 0.0) return a;
  const FieldSample b = at_level(l + 1, x);
  return {(1.0 - fr) * a.E + fr * b.E, (1.0 - fr) * a.B + fr * b.B};
}

FieldState sample_field(const GridSpec& grid, const FieldEvaluator& f) {
  FieldState st(grid);
  for (int l = 0; l < grid.n_levels; ++l)
    for (std::size_t n = 0; n < grid.nodes(); ++n) st.set(l, n, f.at(grid.time(l), grid.node(n)));
  return st;
}

}  // namespace hsvm
