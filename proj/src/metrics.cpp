#include "cvxwgd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cvxwgd/errors.hpp"
#include "cvxwgd/kernels.hpp"

namespace cvxwgd {

namespace {

void check_samples(const Mat& xa, const Mat& xb) {
  if (xa.rows() == 0 || xb.rows() == 0) throw DimensionError("mmd2: empty sample");
  if (xa.cols() != xb.cols()) {
    throw DimensionError("mmd2: dimensions differ (" + std::to_string(xa.cols()) + " vs " +
                         std::to_string(xb.cols()) + ")");
  }
}

}  // namespace

double median_bandwidth(const Mat& xa, const Mat& xb) {
  check_samples(xa, xb);
  Mat pooled(xa.rows() + xb.rows(), xa.cols());
  for (std::size_t i = 0; i < xa.rows(); ++i) pooled.set_row(i, xa.row(i));
  for (std::size_t i = 0; i < xb.rows(); ++i) pooled.set_row(xa.rows() + i, xb.row(i));
  Vec dist = kernels::omp::pairwise_distances(pooled);
  if (dist.empty()) return 1.0;
  const auto mid = dist.begin() + static_cast<long>((dist.size() - 1) / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid > 0.0 ? *mid : 1.0;
}

double mmd2(const Mat& xa, const Mat& xb, const MmdConfig& config) {
  check_samples(xa, xb);
  double h = 0.0;
  if (config.bandwidth) {
    h = *config.bandwidth;
    if (!(h > 0.0) || !std::isfinite(h)) throw DimensionError("mmd2: bandwidth must be positive");
  } else {
    h = median_bandwidth(xa, xb);
  }
  const double na = static_cast<double>(xa.rows());
  const double nb = static_cast<double>(xb.rows());
  const double kaa = kernels::omp::rbf_kernel_sum(xa, xa, h) / (na * na);
  const double kbb = kernels::omp::rbf_kernel_sum(xb, xb, h) / (nb * nb);
  const double kab = kernels::omp::rbf_kernel_sum(xa, xb, h) / (na * nb);
  return std::max(0.0, kaa + kbb - 2.0 * kab);
}

MomentRmse moment_rmse(const Mat& x, const Vec& ref_mean, const Vec& ref_var) {
  const std::size_t d = x.cols();
  if (ref_mean.size() != d || ref_var.size() != d) throw DimensionError("moment_rmse: reference length mismatch");
  if (x.rows() == 0) throw DimensionError("moment_rmse: empty sample");
  const double n = static_cast<double>(x.rows());
  double se_mean = 0.0;
  double se_var = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) m += x(i, c);
    m /= n;
    double v = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) v += (x(i, c) - m) * (x(i, c) - m);
    v /= n;
    se_mean += (m - ref_mean[c]) * (m - ref_mean[c]);
    se_var += (v - ref_var[c]) * (v - ref_var[c]);
  }
  return {std::sqrt(se_mean / static_cast<double>(d)), std::sqrt(se_var / static_cast<double>(d))};
}

double verify_dual_constraint(const Mat& lambda, const Mat& x, double beta_tilde, std::size_t n_dirs,
                              std::uint64_t seed, const ArrangementSet* patterns) {
  if (n_dirs == 0) throw DimensionError("verify_dual_constraint: n_dirs must be positive");
  if (lambda.rows() != x.rows() || lambda.cols() != x.cols()) {
    throw DimensionError("verify_dual_constraint: lambda and X differ in shape");
  }
  const std::size_t d = x.cols();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat ws(n_dirs, d);
  std::size_t filled = 0;
  const std::size_t max_draws = 1000 * n_dirs;
  for (std::size_t draw = 0; filled < n_dirs && draw < max_draws; ++draw) {
    Vec w(d);
    double nrm = 0.0;
    while (nrm == 0.0) {
      for (auto& v : w) v = gauss(rng);
      nrm = norm2(w);
    }
    double r = 0.0;
    while (r == 0.0) r = std::pow(unif(rng), 1.0 / static_cast<double>(d));
    for (auto& v : w) v *= r / nrm;
    if (patterns != nullptr && !patterns->contains(activation_pattern(x, w))) continue;
    ws.set_row(filled++, w);
  }
  if (filled == 0) throw CoverageError("verify_dual_constraint: no direction realizes a stored pattern");
  if (filled < n_dirs) ws = Mat(filled, d, Vec(ws.vec().begin(), ws.vec().begin() + static_cast<long>(filled * d)));
  return kernels::omp::dual_constraint_max(lambda, x, ws) - beta_tilde;
}

}  // namespace cvxwgd
