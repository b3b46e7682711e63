#pragma once

// Experiment configuration: flat `key = value` lines grouped by `[section]`
// headers, `#` comments. Every error names the file and line.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cvxwgd/conic.hpp"
#include "cvxwgd/dynamics.hpp"
#include "cvxwgd/reference.hpp"
#include "cvxwgd/targets.hpp"

namespace cvxwgd {

enum class ExperimentMethod { cvxnn, nn, reference };

struct TargetSpec {
  std::string kind = "double_banana";  // double_banana | gaussian | standard_normal | mixture
  std::size_t dim = 2;
  Vec mean;                 // gaussian; empty means zeros
  Vec cov;                  // gaussian, row-major; empty means identity
  Vec y_obs{3.4011973816621555, 3.4011973816621555};
  double sigma_noise = 0.3;
  double sigma_prior = 1.0;
  Vec weights;                  // mixture
  std::vector<Vec> means;       // mixture, one per component
  std::vector<Vec> covs;        // mixture, row-major; empty means identity

  TargetModel build() const;
};

struct ReferenceSpec {
  std::string path;  // samples CSV; empty: generate with the chain settings
  std::size_t samples = 300;
  std::size_t chains = 10;
  double eps = 1e-2;
  std::size_t burn_in = 10000;
  std::size_t thinning = 10;
  bool metropolis = true;

  ChainConfig chain_config(std::uint64_t seed) const;
};

struct ExperimentConfig {
  ExperimentMethod method = ExperimentMethod::cvxnn;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::size_t checkpoint_every = 0;  // 0: only the initial and final particles

  TargetSpec target;

  std::size_t n_particles = 50;
  Vec init_mean;  // empty means zeros
  double init_scale = 1.0;

  RunSettings run;  // method, seed and solver are filled from the other fields
  SolverSettings solver;
  ReferenceSpec reference;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  RunSettings resolved_run() const;
};

std::string to_string(ExperimentMethod m);

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig parse_config(const std::string& path);

/// Fully resolved configuration as (section.key, value) pairs in file order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

}  // namespace cvxwgd
