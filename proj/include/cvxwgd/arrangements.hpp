#pragma once

// Activation patterns 1(X w >= 0) of the rows of X. Each distinct pattern is
// the diagonal of one D_j and indexes one pair of constraint blocks.

#include <cstdint>
#include <vector>

#include "cvxwgd/densela.hpp"

namespace cvxwgd {

using Pattern = std::vector<std::uint8_t>;

enum class ArrangementSource { exact, sampled };

struct ArrangementSet {
  std::vector<Pattern> patterns;   // pairwise distinct, lexicographically sorted
  ArrangementSource source = ArrangementSource::sampled;
  std::vector<Vec> representative_ws;  // representative_ws[j] realizes patterns[j]

  std::size_t size() const { return patterns.size(); }
  bool contains(const Pattern& p) const;
};

/// 1(X w >= 0), bit n for row n.
Pattern activation_pattern(const Mat& x, std::span<const double> w);

/// Deduplicated patterns of M Gaussian directions u_j ~ N(0, I_d).
ArrangementSet sample_arrangements(const Mat& x, std::size_t m, std::uint64_t seed);

/// Complete pattern set for d = 2 by an angular sweep: every boundary ray
/// x_n^T w = 0 and the midpoint of every sector between consecutive rays.
ArrangementSet enumerate_arrangements_2d(const Mat& x);

/// ceil(2 r (e (N - 1) / r)^r), the upper bound on the number of patterns.
double count_bound(std::size_t n, std::size_t r);

/// Numerical rank via the eigenvalues of X^T X.
std::size_t matrix_rank(const Mat& x, double rel_tol = 1e-10);

}  // namespace cvxwgd
