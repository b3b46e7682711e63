#pragma once

// Command implementations behind the command-line tool. Each returns a process
// exit code; human-readable output goes to `out`, diagnostics to `err`.

#include <iosfwd>
#include <string>

#include "cvxwgd/config.hpp"
#include "cvxwgd/densela.hpp"

namespace cvxwgd {

/// Reference samples for a config: loaded from reference.path when set,
/// otherwise drawn with the configured Langevin chains.
Mat reference_samples(const ExperimentConfig& config, double* acceptance_rate = nullptr);

/// Initial ensemble for a config (seeded by the "init" stream).
Mat initial_particles(const ExperimentConfig& config);

/// Writes trace.csv, samples_####.csv and summary.json under output_dir.
int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Prints bt_1 and the L = -Y shutdown threshold for the initial ensemble.
int cmd_betarange(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Prints MMD^2 between two sample files.
int cmd_mmd(const std::string& path_a, const std::string& path_b, std::ostream& out, std::ostream& err);

/// Writes reference.csv under output_dir.
int cmd_reference(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace cvxwgd
