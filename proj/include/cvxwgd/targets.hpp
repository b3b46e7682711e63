#pragma once

// Target posteriors. Densities are known up to an additive constant; the
// samplers only consume scores.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cvxwgd/densela.hpp"

namespace cvxwgd {

struct GaussianTarget {
  Vec mean;
  Mat cov;
  Mat precision;  // derived from cov
};

struct MixtureComponent {
  double weight;
  Vec mean;
  Mat cov;
  Mat precision;         // derived
  double half_log_det;   // derived, 0.5 log det cov
};

struct GaussianMixtureTarget {
  std::vector<MixtureComponent> components;
};

/// Prior N(0, sigma_prior^2 I_2); each y_i ~ N(F(x), sigma_noise^2) with
/// F(x) = log((1 - x1)^2 + 100 (x2 - x1^2)^2).
struct DoubleBananaTarget {
  Vec y_obs;
  double sigma_noise;
  double sigma_prior;
};

class TargetModel {
 public:
  using Params = std::variant<GaussianTarget, GaussianMixtureTarget, DoubleBananaTarget>;

  static TargetModel gaussian(Vec mean, Mat cov);
  static TargetModel standard_normal(std::size_t dim);
  static TargetModel gaussian_mixture(std::vector<double> weights, std::vector<Vec> means, std::vector<Mat> covs);
  static TargetModel double_banana(Vec y_obs, double sigma_noise, double sigma_prior);
  /// y_obs = (log 30, log 30), sigma_noise = 0.3, sigma_prior = 1.
  static TargetModel double_banana_default();

  std::size_t dim() const { return dim_; }
  std::string kind_name() const;
  const Params& params() const { return params_; }

 private:
  TargetModel(Params p, std::size_t dim) : params_(std::move(p)), dim_(dim) {}
  Params params_;
  std::size_t dim_;
};

double log_density(const TargetModel& model, std::span<const double> x);
Vec score(const TargetModel& model, std::span<const double> x);
/// Row n of the result is score(model, x.row(n)).
Mat score_matrix(const TargetModel& model, const Mat& x);

/// Forward map of the double-banana model.
double banana_forward(std::span<const double> x);

}  // namespace cvxwgd
