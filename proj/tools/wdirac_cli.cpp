#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wdirac/wdirac.hpp"

namespace {

enum ExitCode { kOk = 0, kVerdictFailed = 1, kConfigError = 2, kNumericError = 3 };

struct CatalogEntry {
  const char* name;
  const char* parameters;
};

const CatalogEntry kGeometries[] = {
    {"circle", "length (default 2pi), resolution (even, >= 8), twist (0 | 0.5)"},
    {"interval", "length (default pi), resolution (even, >= 8), chirality (+1 | -1)"},
    {"torus", "lengths [L1, L2] (default 2pi), resolution per axis, twist [t1, t2] in {0, 0.5}"},
};

const CatalogEntry kFamilies[] = {
    {"oscillatory-sine", "amplitude (|a| < 1, default 0.5), frequency_scale, members"},
    {"oscillatory-squared", "amplitude (a > -1, default 0.5), frequency_scale, members"},
    {"conformal-exp", "amplitude (default 1), frequency_scale, members"},
    {"random-spd-perturbation", "amplitude (0 < a < 1, default 0.5), seed, base (weight), members"},
};

const CatalogEntry kExperiments[] = {
    {"spectrum", "geometry, weight, solver.k_max"},
    {"minmax", "geometry, weight, solver.minmax_k_max, solver.n_samples, solver.tol"},
    {"continuity", "geometry, family, solver.minmax_k_max, solver.ell_max, solver.p, solver.alpha"},
    {"compare", "geometry (kernel-free), compare.pairs | compare.upper + compare.lower"},
    {"wave", "geometry, weight | family, solver.times, solver.wave_index_max, solver.wave_pairs"},
};

void print_catalog(bool machine) {
  if (machine) {
    wdirac::json j;
    auto section = [](const auto& entries) {
      wdirac::json a = wdirac::json::array();
      for (const auto& e : entries) a.push_back({{"name", e.name}, {"parameters", e.parameters}});
      return a;
    };
    j["geometries"] = section(kGeometries);
    j["families"] = section(kFamilies);
    j["experiments"] = section(kExperiments);
    std::cout << j.dump(2) << "\n";
    return;
  }
  auto section = [](const char* title, const auto& entries) {
    std::cout << title << ":\n";
    for (const auto& e : entries) std::printf("  %-24s %s\n", e.name, e.parameters);
  };
  section("geometries", kGeometries);
  section("families", kFamilies);
  section("experiments", kExperiments);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Dirac eigenvalue laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--out", out_dir, "Output directory (overrides output_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Seed override");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  bool machine = false;
  auto* list = app.add_subcommand("list", "Print built-in geometries, families and experiments");
  list->add_flag("--machine", machine, "JSON output");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    print_catalog(machine);
    return kOk;
  }

  wdirac::ExperimentConfig config;
  try {
    config = wdirac::load_config(config_path);
  } catch (const wdirac::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  wdirac::RunOptions options;
  options.out_dir = out_dir;
  if (*seed_opt) options.seed = seed;
  options.threads = threads;
  try {
    const wdirac::RunResult r = wdirac::run_experiment(config, options);
    for (const auto& c : r.checks) {
      std::printf("%s %-44s value=%.3e threshold=%.3e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                  c.value, c.threshold);
    }
    for (const auto& w : r.warnings) std::printf("WARN %s\n", w.c_str());
    return r.verdict ? kOk : kVerdictFailed;
  } catch (const wdirac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
}
