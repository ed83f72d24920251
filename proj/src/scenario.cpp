#include "hsvm/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hsvm/initial_fields.hpp"
#include "hsvm/kinetic_weight.hpp"

namespace hsvm {

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

json audit_to_json(const AuditReport& r) {
  json v = json::object();
  for (const auto& [k, x] : r.values) v[k] = finite_or_null(x);
  json j;
  j["name"] = r.name;
  j["residual"] = finite_or_null(r.residual);
  j["tolerance"] = finite_or_null(r.tolerance);
  j["thresholded"] = r.thresholded;
  j["pass"] = r.pass;
  j["at_h"] = finite_or_null(r.at_h);
  j["at_h2"] = finite_or_null(r.at_h2);
  j["values"] = v;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json sweep_to_json(const SweepRecord& r) {
  return {{"iter", r.iter},
          {"dE_sup", r.dE_sup},
          {"dB_sup", r.dB_sup},
          {"df_probe_sup", r.df_probe_sup},
          {"rel", r.rel},
          {"ratio", finite_or_null(r.ratio)},
          {"E_sup", r.E_sup},
          {"B_sup", r.B_sup},
          {"grazing", r.grazing},
          {"truncated", r.truncated}};
}

const char* snapshot_header() { return "t,x1,x2,x3,E1,E2,E3,B1,B2,B3,rho,J1,J2,J3"; }

void write_snapshot(std::ostream& os, const FieldState& fields, const SourceHistory& hist, int level) {
  const GridSpec& g = fields.grid();
  os << snapshot_header() << '\n';
  const double t = g.time(level);
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    const Vec3 x = g.node(n);
    const FieldSample s = fields.get(level, n);
    const Moments m = hist.get(level, n);
    const double row[14] = {t,      x[0],   x[1],   x[2],  s.E[0], s.E[1], s.E[2],
                            s.B[0], s.B[1], s.B[2], m.rho, m.J[0], m.J[1], m.J[2]};
    for (int c = 0; c < 14; ++c) os << (c ? "," : "") << fmt17(row[c]);
    os << '\n';
  }
}

void read_snapshot(std::istream& is, FieldState& fields, std::vector<Moments>& moments, int level) {
  const GridSpec& g = fields.grid();
  std::string line;
  if (!std::getline(is, line) || line != snapshot_header()) throw ConfigError("snapshot header mismatch");
  moments.assign(g.nodes(), Moments{});
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    if (!std::getline(is, line)) throw ConfigError("snapshot truncated");
    std::stringstream ss(line);
    double row[14];
    for (double& c : row) {
      std::string cell;
      std::getline(ss, cell, ',');
      c = std::stod(cell);
    }
    fields.set(level, n, {{row[4], row[5], row[6]}, {row[7], row[8], row[9]}});
    moments[n] = {row[10], {row[11], row[12], row[13]}};
  }
}

std::function<double(double, double, double)> closure_interpolation_error(const IterationState& st,
                                                                          const VelocityGrid& vg) {
  if (!st.wall_flux || !st.f_prev) return {};
  auto table = st.wall_flux;
  auto prev = st.f_prev;
  const VelocityGrid* grid = &vg;
  return [table, prev, grid](double t, double x1, double x2) {
    return std::fabs(table->at(t, x1, x2) - outgoing_wall_flux(*prev, t, x1, x2, *grid));
  };
}

namespace {

// Preset grids put only a few nodes across the source, so centered-difference Maxwell residuals
// are reported without a threshold. Their convergence order is checked in the acceptance suite.
AuditReport informational(AuditReport r) {
  r.thresholded = false;
  r.pass = true;
  if (r.note.empty()) r.note = "grid-scale residual, not thresholded at preset resolution";
  return r;
}

}  // namespace

RunSummary run_scenario(const RunConfig& c, std::ostream* log) {
  namespace fs = std::filesystem;
  RunSummary out;
  out.out_dir = c.output.dir;
  stage("config", [&] {
    validate(c);
    fs::create_directories(c.output.dir);
    std::ofstream(fs::path(c.output.dir) / "config.json") << to_json(c).dump(2) << '\n';
    return 0;
  });
  const Problem problem = stage("config", [&] { return make_problem(c); });
  const PicardOptions popt = stage("config", [&] { return make_picard_options(c); });

  stage("compatibility", [&] {
    const VelocityGrid vg = VelocityGrid::make(c.velocity.vmax, c.velocity.nv, c.env.delta);
    Box region = problem.f0->support();
    if (region.empty()) region = {{-0.5, -0.5, 0.0}, {0.5, 0.5, 1.0}};
    const CompatibilityReport r = compatibility_check(*problem.init, *problem.f0, vg, region, 5, 2e-2);
    if (!r.ok)
      throw ConfigError("initial fields violate the constraints: |div E0 - 4 pi rho0| = " + std::to_string(r.gauss_E) +
                        ", |div B0| = " + std::to_string(r.gauss_B) + ", wall |E0_tan| = " +
                        std::to_string(r.wall_E_tan) + ", wall |B0_3| = " + std::to_string(r.wall_B_norm));
    return 0;
  });

  Picard picard = stage("picard", [&] { return Picard(problem, popt); });
  std::ofstream conv(fs::path(c.output.dir) / "convergence.jsonl");
  out.convergence = stage("picard", [&] {
    return picard.run([&](const SweepRecord& r, const IterationState&) {
      conv << sweep_to_json(r).dump() << '\n';
      conv.flush();
      if (log) *log << "sweep " << r.iter << ": dE " << r.dE_sup << " dB " << r.dB_sup << " df " << r.df_probe_sup
                    << " rel " << r.rel << '\n';
    });
  });

  const IterationState& st = picard.state();
  const GridSpec& g = popt.grid;
  stage("snapshots", [&] {
    for (int l = 0; l < g.n_levels; l += c.output.stride) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%d.csv", l);
      std::ofstream os(fs::path(c.output.dir) / name);
      write_snapshot(os, *st.fields, *st.hist, l);
    }
    return 0;
  });

  out.audits = stage("audits", [&] {
    std::vector<AuditReport> a;
    for (auto& r : maxwell_residuals(*st.fields, *st.hist)) a.push_back(informational(std::move(r)));
    const VelocityGrid& vg = picard.velocity_grid();
    SourceModel src{st.f.get(), st.transport.get(), problem.env};
    std::vector<Vec3> wall;
    for (int k = 0; k < 4; ++k) {
      const double ang = 2.0 * std::numbers::pi * k / 4.0;
      wall.push_back({0.2 * std::cos(ang), 0.2 * std::sin(ang), 0.0});
    }
    const AuditReport dir = dirichlet_audit(picard.solver(), src, g.T, wall);
    a.push_back(conductor_bc_residuals(*st.fields, *st.hist, dir.tolerance));
    a.push_back(dir);

    std::vector<std::pair<double, double>> wp;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) wp.push_back({-0.19 + 0.183 * i, -0.17 + 0.177 * j});  // off the wall nodes
    MassFluxOptions mo;
    mo.n_space = 8;
    mo.n_times = 5;
    mo.threads = c.threads;
    double outflux = 0.0;
    for (const auto& [x1, x2] : wp) outflux = std::fmax(outflux, outgoing_wall_flux(*st.f, g.T, x1, x2, vg));
    const ClosureKind kind = problem.closure.kind;
    const double lag = out.convergence.sweeps.empty() ? 0.0 : out.convergence.sweeps.back().rel;
    mo.flux_tol = 2.0 * std::fmax(lag, c.picard.tol) * outflux + 1e-14;
    if (kind == ClosureKind::Diffuse) mo.pointwise_tol = closure_interpolation_error(st, vg);
    a.push_back(mass_flux_audit(*st.f, kind, vg, g.T, wp, mo));

    const EnergySeries es = energy_series(*st.fields, *st.f, vg, 8, c.threads);
    AuditReport en = energy_balance(es, problem.env, 0.05, kind == ClosureKind::Specular);
    if (!en.thresholded) en.note = "the wall exchanges energy under this closure; the balance is reported only";
    a.push_back(en);

    WeightContext ctx;
    auto fe = std::make_shared<GridFieldEvaluator>(st.fields);
    ctx.fields = fe.get();
    ctx.env = problem.env;
    const PrReport pr = measure_margin(ctx, g.Lx, g.T, c.velocity.vmax, 1024);
    AuditReport prr;
    prr.name = "sign_condition";
    prr.residual = pr.margin;
    prr.thresholded = c.picard.require_pr;
    prr.pass = !prr.thresholded || pr.ok;
    prr.values = {{"margin", pr.margin}, {"violations", static_cast<double>(pr.violations.size())}};
    a.push_back(prr);

    std::vector<std::pair<double, PhasePoint>> probes;
    for (std::size_t k = 0; k < std::min<std::size_t>(32, picard.probes().size()); ++k) {
      const ProbePoint& p = picard.probes()[k];
      probes.push_back({p.t, {p.x, p.v}});
    }
    a.push_back(weighted_derivative_audit(*st.f, probes, ctx));

    AuditReport cr;
    cr.name = "picard_convergence";
    cr.residual = out.convergence.sweeps.empty() ? 0.0 : out.convergence.sweeps.back().rel;
    cr.tolerance = c.picard.tol;
    cr.pass = out.convergence.converged;
    cr.values = {{"iterations", static_cast<double>(out.convergence.iterations)},
                 {"contraction", out.convergence.contraction()},
                 {"pr_margin", out.convergence.pr_margin}};
    cr.note = out.convergence.stop_reason;
    a.push_back(cr);
    return a;
  });

  std::ofstream aud(fs::path(c.output.dir) / "audits.jsonl");
  for (const auto& r : out.audits) aud << audit_to_json(r).dump() << '\n';
  return out;
}

std::vector<AuditReport> audit_run_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const RunConfig c = load_config((fs::path(dir) / "config.json").string());
  const GridSpec g = make_grid(c);
  if (c.output.stride != 1) throw ConfigError("offline audits need every time level (output.stride = 1)");
  FieldState fields(g);
  SourceHistory hist(g);
  for (int l = 0; l < g.n_levels; ++l) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%d.csv", l);
    std::ifstream is(fs::path(dir) / name);
    if (!is) throw ConfigError(std::string("missing snapshot ") + name);
    std::vector<Moments> m;
    read_snapshot(is, fields, m, l);
    hist.append_level(m);
  }
  std::vector<AuditReport> a;
  for (auto& r : maxwell_residuals(fields, hist)) a.push_back(informational(std::move(r)));
  a.push_back(conductor_bc_residuals(fields, hist, 1e-12 * std::fmax(1.0, std::fmax(fields.sup_E(), fields.sup_B()))));
  return a;
}

}  // namespace hsvm
