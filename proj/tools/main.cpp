// Command-line front end: run, betarange, mmd, reference.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cvxwgd/commands.hpp"
#include "cvxwgd/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Convex-network Wasserstein gradient descent sampler"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Evolve particles and write trace, checkpoints and summary");
  run->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);

  auto* betarange = app.add_subcommand("betarange", "Print the feasibility window of beta_tilde for the initial particles");
  betarange->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);

  std::string path_a, path_b;
  auto* mmd = app.add_subcommand("mmd", "Print MMD^2 between two sample files");
  mmd->add_option("a", path_a, "First samples CSV")->required()->check(CLI::ExistingFile);
  mmd->add_option("b", path_b, "Second samples CSV")->required()->check(CLI::ExistingFile);

  auto* reference = app.add_subcommand("reference", "Draw Langevin reference samples");
  reference->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  // CVXWGD_LOG_LEVEL=quiet suppresses the progress lines on stdout
  const char* level = std::getenv("CVXWGD_LOG_LEVEL");
  const bool quiet = level != nullptr && std::string(level) == "quiet";
  std::ostream null_stream(nullptr);
  std::ostream& out = quiet ? null_stream : std::cout;

  try {
    if (*mmd) return cvxwgd::cmd_mmd(path_a, path_b, std::cout, std::cerr);
    const cvxwgd::ExperimentConfig cfg = cvxwgd::parse_config(config_path);
    if (*run) return cvxwgd::cmd_run(cfg, out, std::cerr);
    if (*betarange) return cvxwgd::cmd_betarange(cfg, std::cout, std::cerr);
    if (*reference) return cvxwgd::cmd_reference(cfg, out, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
