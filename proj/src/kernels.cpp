#include "cvxwgd/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "cvxwgd/errors.hpp"

namespace cvxwgd::kernels {

void project_psd_svec(std::span<double> block) {
  const Mat s = smat(block);
  const SymEig eig = eig_sym(s);
  const std::size_t k = s.rows();
  if (eig.eigenvalues.front() >= 0.0) return;
  Mat p(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    const double lam = eig.eigenvalues[c];
    if (lam <= 0.0) continue;
    for (std::size_t i = 0; i < k; ++i) {
      const double vi = lam * eig.eigenvectors(i, c);
      for (std::size_t j = i; j < k; ++j) p(i, j) += vi * eig.eigenvectors(j, c);
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) p(j, i) = p(i, j);
  const Vec out = svec(p);
  std::copy(out.begin(), out.end(), block.begin());
}

double dual_constraint_value(const Mat& lambda, const Mat& x, std::span<const double> w) {
  const double ww = dot(w, w);
  double acc = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    const double u = dot(x.row(n), w);
    if (u > 0.0) acc += 2.0 * ww - dot(lambda.row(n), w) * 2.0 * u;
  }
  return std::abs(acc);
}

namespace {

void check_blocks(std::span<const double> v, std::span<const PsdBlock> blocks) {
  for (const auto& b : blocks) {
    if (b.offset + svec_length(b.order) > v.size()) throw DimensionError("project_psd_blocks: block out of range");
  }
}

void check_scan(const Mat& lambda, const Mat& x, const Mat& ws) {
  if (lambda.rows() != x.rows() || lambda.cols() != x.cols() || ws.cols() != x.cols()) {
    throw DimensionError("dual_constraint_max: shape mismatch");
  }
}

double row_kernel_sum(const Mat& xa, const Mat& xb, std::size_t i, double inv2h2) {
  double s = 0.0;
  const auto a = xa.row(i);
  for (std::size_t j = 0; j < xb.rows(); ++j) {
    const auto b = xb.row(j);
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double t = a[k] - b[k];
      d2 += t * t;
    }
    s += std::exp(-d2 * inv2h2);
  }
  return s;
}

void check_kernel(const Mat& xa, const Mat& xb, double h) {
  if (xa.cols() != xb.cols()) throw DimensionError("rbf_kernel_sum: dimension mismatch");
  if (!(h > 0.0)) throw std::invalid_argument("rbf_kernel_sum: bandwidth must be positive");
}

double pair_distance(const Mat& x, std::size_t i, std::size_t j) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.cols(); ++k) {
    const double t = x(i, k) - x(j, k);
    d2 += t * t;
  }
  return std::sqrt(d2);
}

}  // namespace

namespace serial {

void project_psd_blocks(std::span<double> v, std::span<const PsdBlock> blocks) {
  check_blocks(v, blocks);
  for (const auto& b : blocks) project_psd_svec(v.subspan(b.offset, svec_length(b.order)));
}

double rbf_kernel_sum(const Mat& xa, const Mat& xb, double bandwidth) {
  check_kernel(xa, xb, bandwidth);
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  Vec rows(xa.rows());
  for (std::size_t i = 0; i < xa.rows(); ++i) rows[i] = row_kernel_sum(xa, xb, i, inv2h2);
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

double dual_constraint_max(const Mat& lambda, const Mat& x, const Mat& ws) {
  check_scan(lambda, x, ws);
  double best = 0.0;
  for (std::size_t i = 0; i < ws.rows(); ++i) best = std::max(best, dual_constraint_value(lambda, x, ws.row(i)));
  return best;
}

Vec pairwise_distances(const Mat& x) {
  const std::size_t n = x.rows();
  Vec out;
  out.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(pair_distance(x, i, j));
  return out;
}

}  // namespace serial

namespace omp {

void project_psd_blocks(std::span<double> v, std::span<const PsdBlock> blocks) {
  check_blocks(v, blocks);
  const auto nb = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nb; ++i) {
    const auto& b = blocks[static_cast<std::size_t>(i)];
    project_psd_svec(v.subspan(b.offset, svec_length(b.order)));
  }
}

double rbf_kernel_sum(const Mat& xa, const Mat& xb, double bandwidth) {
  check_kernel(xa, xb, bandwidth);
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  Vec rows(xa.rows());
  const auto na = static_cast<std::ptrdiff_t>(xa.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < na; ++i) {
    rows[static_cast<std::size_t>(i)] = row_kernel_sum(xa, xb, static_cast<std::size_t>(i), inv2h2);
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

double dual_constraint_max(const Mat& lambda, const Mat& x, const Mat& ws) {
  check_scan(lambda, x, ws);
  double best = 0.0;
  const auto nw = static_cast<std::ptrdiff_t>(ws.rows());
#pragma omp parallel for schedule(static) reduction(max : best)
  for (std::ptrdiff_t i = 0; i < nw; ++i) {
    best = std::max(best, dual_constraint_value(lambda, x, ws.row(static_cast<std::size_t>(i))));
  }
  return best;
}

Vec pairwise_distances(const Mat& x) {
  const std::size_t n = x.rows();
  Vec out(n * (n - (n > 0 ? 1 : 0)) / 2);
  const auto ni = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < ni; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::size_t base = i * n - i * (i + 1) / 2;  // pairs (i', j) with i' < i
    for (std::size_t j = i + 1; j < n; ++j) out[base + (j - i - 1)] = pair_distance(x, i, j);
  }
  return out;
}

}  // namespace omp

}  // namespace cvxwgd::kernels
