#pragma once

// Data-parallel hot loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp; both produce
// bit-identical results (reductions are accumulated per row, then summed in
// row order on one thread).

#include <cstddef>
#include <span>
#include <vector>

#include "cvxwgd/densela.hpp"

namespace cvxwgd::kernels {

/// One PSD cone block inside a stacked svec vector.
struct PsdBlock {
  std::size_t offset;  // first svec entry
  std::size_t order;   // matrix order k
};

namespace serial {

void project_psd_blocks(std::span<double> v, std::span<const PsdBlock> blocks);
/// Sum over all pairs (a in xa, b in xb) of exp(-|a-b|^2 / (2 h^2)).
double rbf_kernel_sum(const Mat& xa, const Mat& xb, double bandwidth);
/// max over rows of ws of |sum_n |w|^2 psi''(x_n.w) - lambda_n.w psi'(x_n.w)|
double dual_constraint_max(const Mat& lambda, const Mat& x, const Mat& ws);
Vec pairwise_distances(const Mat& x);

}  // namespace serial

namespace omp {

void project_psd_blocks(std::span<double> v, std::span<const PsdBlock> blocks);
double rbf_kernel_sum(const Mat& xa, const Mat& xb, double bandwidth);
double dual_constraint_max(const Mat& lambda, const Mat& x, const Mat& ws);
Vec pairwise_distances(const Mat& x);

}  // namespace omp

/// Projects one svec-encoded symmetric matrix onto the PSD cone in place.
void project_psd_svec(std::span<double> block);

/// Dual-constraint integrand for a single direction w.
double dual_constraint_value(const Mat& lambda, const Mat& x, std::span<const double> w);

}  // namespace cvxwgd::kernels
