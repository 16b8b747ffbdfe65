#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "anisoswarm/commands.hpp"

using namespace anisoswarm;

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic interacting particle models: simulation, equilibria and stability"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  int threads = 0;
  std::string seed;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out", out_dir, "Output directory (run.out)");
  app.add_option("--set", overrides, "Override KEY=VALUE, e.g. tensor.chi=0.4 (repeatable)");
  app.add_option("--threads", threads, "OpenMP threads (default: ANISOSWARM_THREADS)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Random seed (sim.seed)");

  std::string input;
  const char* names[] = {"simulate", "ring", "ellipse-branch", "stability", "line-threshold", "stripe",
                         "classify"};
  const char* help[] = {"Integrate the particle system and classify the final state",
                        "Continuous and discrete ring radius",
                        "Ellipse equilibrium branch (continuous and discrete)",
                        "Linear stability of a ring, ellipse or line ansatz",
                        "Stability threshold in chi of the vertical line",
                        "Stripe equilibrium condition",
                        "Classify positions from a CSV file"};
  for (int i = 0; i < 7; ++i) {
    auto* sub = app.add_subcommand(names[i], help[i]);
    if (std::string(names[i]) == "classify") sub->add_option("input", input, "Positions CSV (t,id,x,y)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ConfigMap map = ConfigMap::defaults();
  try {
    if (!config_path.empty()) map.merge_ini_file(config_path);
    for (const auto& s : overrides) map.set_assignment(s);
    if (!out_dir.empty()) map.set("run.out", out_dir);
    if (!seed.empty()) map.set("sim.seed", seed);
    if (!input.empty()) map.set("classify.input", input);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("ANISOSWARM_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        threads = 0;
      }
      if (threads < 1) {
        std::cerr << "error: ANISOSWARM_THREADS must be a positive integer\n";
        return 2;
      }
    }
  }
  if (threads > 0) set_num_threads(threads);

  return run_command(app.get_subcommands().front()->get_name(), map, std::cout, std::cerr);
}
