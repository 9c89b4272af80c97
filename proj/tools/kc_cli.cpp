// kc: compress sampled Markov kernels onto small supports.
//
//   kc generate --config cfg.json
//   kc select   --config cfg.json --seed 3 --threads 4 --out results/
//   kc pipeline --config cfg.json --set solver.max_iter=2000
//   kc evaluate --config cfg.json

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kc/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kernel compression by integrated transportation distance"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
  bool emit_plot_data = false;
  std::vector<std::string> assignments;

  for (const char* name : {"generate", "select", "pipeline", "evaluate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", seed, "Single seed, replaces the configured seeds");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output directory");
    sub->add_flag("--emit-plot-data", emit_plot_data, "Write sample/candidate/selection CSVs");
    sub->add_option("--set", assignments, "Override a config field: dotted.path=value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const CLI::App* active = app.get_subcommands().front();
  kc::ConfigOverrides overrides;
  if (active->count("--seed")) overrides.seed = seed;
  if (active->count("--threads")) overrides.threads = threads;
  if (active->count("--out")) overrides.out = out;
  overrides.emit_plot_data = emit_plot_data;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "kc: --set expects path=value, got '" << a << "'\n";
      return 2;
    }
    overrides.assignments.emplace_back(a.substr(0, eq), a.substr(eq + 1));
  }
  return kc::run_experiment(config_path, kc::parse_mode(active->get_name()), overrides);
}
