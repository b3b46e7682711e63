#pragma once

// Langevin reference sampler (MALA, or ULA without the accept/reject step).

#include <cstddef>
#include <cstdint>

#include "cvxwgd/densela.hpp"
#include "cvxwgd/targets.hpp"

namespace cvxwgd {

struct ChainConfig {
  double eps = 1e-2;
  std::size_t n_steps = 13000;
  std::size_t burn_in = 10000;
  std::size_t thinning = 10;
  std::uint64_t seed = 0;
  bool use_metropolis = true;

  void validate() const;
};

struct ChainResult {
  Mat samples;             // (n_steps - burn_in) / thinning rows
  double acceptance_rate;  // 1 for ULA
};

/// x <- x + eps grad log pi(x) + sqrt(2 eps) xi, optionally Metropolis-adjusted.
ChainResult langevin_chain(const TargetModel& model, const Vec& x0, const ChainConfig& config);

/// One chain per row of `starts`, with derived seeds; samples stacked in chain
/// order. Chains run in parallel.
ChainResult langevin_chains(const TargetModel& model, const Mat& starts, const ChainConfig& config);

}  // namespace cvxwgd
