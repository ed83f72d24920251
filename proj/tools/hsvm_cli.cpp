#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "hsvm/presets.hpp"
#include "hsvm/scenario.hpp"

using namespace hsvm;

int main(int argc, char** argv) {
  CLI::App app{"half-space relativistic Vlasov-Maxwell solver"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = -1;
  long long seed = -1;
  std::string out_dir;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--seed", seed, "seed of the diffuse Monte Carlo");
  app.add_option("--out", out_dir, "output directory");

  auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "config.json")->required();
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "no per-sweep log");

  auto* audit = app.add_subcommand("audit", "recompute grid audits of a finished run");
  std::string run_dir;
  audit->add_option("run-dir", run_dir, "directory written by `run`")->required();

  auto* presets = app.add_subcommand("presets", "list presets, describe one, or write its config");
  std::string preset_name;
  std::string write_path;
  presets->add_option("name", preset_name, "preset to describe");
  presets->add_option("--write", write_path, "write the preset config to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      json j;
      {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config " + config_path);
        j = json::parse(in);
      }
      RunConfig c = config_from_json(j);
      if (threads >= 0) c.threads = threads;
      if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
      if (!out_dir.empty()) c.output.dir = out_dir;
      const RunSummary s = run_scenario(c, quiet ? nullptr : &std::cerr);
      int failed = 0;
      for (const auto& a : s.audits) {
        std::printf("%-22s %s residual=%.3e tol=%.3e\n", a.name.c_str(),
                    !a.thresholded ? "INFO" : (a.pass ? "PASS" : "FAIL"), a.residual, a.tolerance);
        if (a.thresholded && !a.pass) ++failed;
      }
      std::printf("converged=%s iterations=%d outputs in %s\n", s.convergence.converged ? "yes" : "no",
                  s.convergence.iterations, s.out_dir.c_str());
      return failed ? 3 : 0;
    }
    if (*audit) {
      for (const auto& a : audit_run_dir(run_dir)) std::cout << audit_to_json(a).dump() << '\n';
      return 0;
    }
    if (*presets) {
      if (preset_name.empty()) {
        for (const auto& n : list_presets()) std::cout << n << '\n';
        return 0;
      }
      if (!write_path.empty()) {
        std::ofstream(write_path) << to_json(preset_config(preset_name)).dump(2) << '\n';
        return 0;
      }
      std::cout << describe_preset(preset_name).dump(2) << '\n';
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error in stage config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
