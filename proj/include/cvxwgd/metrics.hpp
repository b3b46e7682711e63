#pragma once

// Sample-quality diagnostics.

#include <cstdint>
#include <optional>

#include "cvxwgd/arrangements.hpp"
#include "cvxwgd/densela.hpp"

namespace cvxwgd {

struct MmdConfig {
  std::optional<double> bandwidth;  // empty: lower median of pooled pairwise distances
};

/// RBF bandwidth from the median heuristic on the pooled sample.
double median_bandwidth(const Mat& xa, const Mat& xb);

/// Biased (V-statistic) MMD^2 with k(x, y) = exp(-|x - y|^2 / (2 h^2)).
double mmd2(const Mat& xa, const Mat& xb, const MmdConfig& config = {});

struct MomentRmse {
  double mean;
  double var;
};

/// RMSE over coordinates of the sample mean and the population (1/N) variance.
MomentRmse moment_rmse(const Mat& x, const Vec& ref_mean, const Vec& ref_var);

/// max over n_dirs uniform unit-ball directions w of
///   |sum_n |w|^2 psi''(x_n.w) - lambda_n.w psi'(x_n.w)| - beta_tilde.
/// With `patterns`, only directions realizing a stored pattern are counted.
double verify_dual_constraint(const Mat& lambda, const Mat& x, double beta_tilde, std::size_t n_dirs,
                              std::uint64_t seed, const ArrangementSet* patterns = nullptr);

}  // namespace cvxwgd
