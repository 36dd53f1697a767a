#include "cutwave/error.hpp"
#include "cutwave/scenario.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Cut-cell DG acoustic wave solver"};
  std::string scenario, config, out = "out";
  cutwave::Overrides o;
  double tau = 0.0;
  int degree = 0;
  bool verbose = false;
  app.add_option("scenario", scenario, "mms, eig, pacman, fish or custom")
      ->required()
      ->check(CLI::IsMember({"mms", "eig", "pacman", "fish", "custom"}));
  app.add_option("--config", config, "JSON scenario file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  app.add_flag("--no-srd", o.no_srd, "disable state redistribution");
  auto* tau_opt = app.add_option("--tau", tau, "penalty for both tau_p and tau_u")->check(CLI::NonNegativeNumber);
  auto* deg_opt = app.add_option("--degree", degree, "polynomial degree")->check(CLI::Range(1, 10));
  app.add_flag("-v,--verbose", verbose, "debug logging");
  CLI11_PARSE(app, argc, argv);

  if (verbose) spdlog::set_level(spdlog::level::debug);
  if (const char* env = std::getenv("CUTWAVE_THREADS")) {
    int n = std::atoi(env);
    if (n < 1) {
      std::cerr << "CUTWAVE_THREADS must be a positive integer\n";
      return 2;
    }
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
  }
  if (tau_opt->count()) o.tau = tau;
  if (deg_opt->count()) o.degree = degree;

  try {
    auto cfg = cutwave::load_config(config);
    if (cfg.scenario != scenario) {
      std::cerr << "config describes scenario '" << cfg.scenario << "', not '" << scenario << "'\n";
      return 2;
    }
    cutwave::apply_overrides(cfg, o);
    return cutwave::run_scenario(cfg, out);
  } catch (const cutwave::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == cutwave::ErrorCode::InvalidConfig ? 2 : 1;
  }
}
