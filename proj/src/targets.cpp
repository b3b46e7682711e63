#include "cvxwgd/targets.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "cvxwgd/errors.hpp"

namespace cvxwgd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) + ", got " +
                         std::to_string(got));
  }
}

Mat spd_inverse(const Mat& cov, const char* what) {
  if (!cov.square()) throw DimensionError(std::string(what) + ": covariance not square");
  try {
    return chol_solve(cov, Mat::identity(cov.rows()));
  } catch (const NumericError&) {
    throw std::invalid_argument(std::string(what) + ": covariance is not SPD");
  }
}

// (x - mu)^T P (x - mu) and P (mu - x)
double quad_form(const Mat& p, std::span<const double> x, std::span<const double> mu, Vec* grad) {
  const std::size_t d = x.size();
  Vec diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - mu[i];
  const Vec pd = matvec(p, diff);
  if (grad) {
    grad->resize(d);
    for (std::size_t i = 0; i < d; ++i) (*grad)[i] = -pd[i];
  }
  return dot(diff, pd);
}

struct BananaTerms {
  double g;
  double f;
  double dg0;
  double dg1;
};

BananaTerms banana_terms(std::span<const double> x) {
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  const double g = a * a + 100.0 * b * b;
  if (!(g > 0.0)) {
    throw NumericError("double-banana: forward map singular at (" + std::to_string(x[0]) + ", " +
                       std::to_string(x[1]) + ")");
  }
  return {g, std::log(g), -2.0 * a - 400.0 * x[0] * b, 200.0 * b};
}

// log-weights log w_k - 0.5 log det S_k - 0.5 q_k(x)
Vec mixture_log_terms(const GaussianMixtureTarget& m, std::span<const double> x, std::vector<Vec>* grads) {
  Vec lt(m.components.size());
  if (grads) grads->resize(m.components.size());
  for (std::size_t k = 0; k < m.components.size(); ++k) {
    const auto& c = m.components[k];
    const double q = quad_form(c.precision, x, c.mean, grads ? &(*grads)[k] : nullptr);
    lt[k] = std::log(c.weight) - c.half_log_det - 0.5 * q;
  }
  return lt;
}

}  // namespace

TargetModel TargetModel::gaussian(Vec mean, Mat cov) {
  if (cov.rows() != mean.size()) throw DimensionError("gaussian: mean/covariance size mismatch");
  const std::size_t d = mean.size();
  Mat prec = spd_inverse(cov, "gaussian");
  return TargetModel(GaussianTarget{std::move(mean), std::move(cov), std::move(prec)}, d);
}

TargetModel TargetModel::standard_normal(std::size_t dim) { return gaussian(Vec(dim, 0.0), Mat::identity(dim)); }

TargetModel TargetModel::gaussian_mixture(std::vector<double> weights, std::vector<Vec> means, std::vector<Mat> covs) {
  if (weights.empty() || weights.size() != means.size() || weights.size() != covs.size()) {
    throw DimensionError("gaussian_mixture: component lists differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("gaussian_mixture: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("gaussian_mixture: weights must sum to 1");
  const std::size_t d = means.front().size();
  GaussianMixtureTarget m;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (means[k].size() != d || covs[k].rows() != d) throw DimensionError("gaussian_mixture: component dimension mismatch");
    Mat prec = spd_inverse(covs[k], "gaussian_mixture");
    const double hld = 0.5 * Cholesky(covs[k]).log_det();
    m.components.push_back({weights[k], std::move(means[k]), std::move(covs[k]), std::move(prec), hld});
  }
  return TargetModel(std::move(m), d);
}

TargetModel TargetModel::double_banana(Vec y_obs, double sigma_noise, double sigma_prior) {
  if (y_obs.empty()) throw std::invalid_argument("double_banana: need at least one observation");
  if (!(sigma_noise > 0.0) || !(sigma_prior > 0.0)) throw std::invalid_argument("double_banana: sigmas must be positive");
  return TargetModel(DoubleBananaTarget{std::move(y_obs), sigma_noise, sigma_prior}, 2);
}

TargetModel TargetModel::double_banana_default() {
  return double_banana({std::log(30.0), std::log(30.0)}, 0.3, 1.0);
}

std::string TargetModel::kind_name() const {
  return std::visit(Overloaded{[](const GaussianTarget&) { return std::string("gaussian"); },
                               [](const GaussianMixtureTarget&) { return std::string("gaussian-mixture"); },
                               [](const DoubleBananaTarget&) { return std::string("double-banana"); }},
                    params_);
}

double banana_forward(std::span<const double> x) {
  require_dim(2, x.size(), "banana_forward");
  return banana_terms(x).f;
}

double log_density(const TargetModel& model, std::span<const double> x) {
  require_dim(model.dim(), x.size(), "log_density");
  return std::visit(
      Overloaded{[&](const GaussianTarget& g) { return -0.5 * quad_form(g.precision, x, g.mean, nullptr); },
                 [&](const GaussianMixtureTarget& m) {
                   const Vec lt = mixture_log_terms(m, x, nullptr);
                   const double mx = *std::max_element(lt.begin(), lt.end());
                   double s = 0.0;
                   for (double v : lt) s += std::exp(v - mx);
                   return mx + std::log(s);
                 },
                 [&](const DoubleBananaTarget& b) {
                   const double f = banana_terms(x).f;
                   double ll = 0.0;
                   for (double y : b.y_obs) ll -= (y - f) * (y - f);
                   ll /= 2.0 * b.sigma_noise * b.sigma_noise;
                   return ll - dot(x, x) / (2.0 * b.sigma_prior * b.sigma_prior);
                 }},
      model.params());
}

Vec score(const TargetModel& model, std::span<const double> x) {
  require_dim(model.dim(), x.size(), "score");
  return std::visit(
      Overloaded{[&](const GaussianTarget& g) {
                   Vec grad;
                   quad_form(g.precision, x, g.mean, &grad);
                   return grad;
                 },
                 [&](const GaussianMixtureTarget& m) {
                   std::vector<Vec> grads;
                   const Vec lt = mixture_log_terms(m, x, &grads);
                   const double mx = *std::max_element(lt.begin(), lt.end());
                   double z = 0.0;
                   for (double v : lt) z += std::exp(v - mx);
                   Vec out(x.size(), 0.0);
                   for (std::size_t k = 0; k < lt.size(); ++k) {
                     const double resp = std::exp(lt[k] - mx) / z;
                     for (std::size_t i = 0; i < x.size(); ++i) out[i] += resp * grads[k][i];
                   }
                   return out;
                 },
                 [&](const DoubleBananaTarget& b) {
                   const BananaTerms t = banana_terms(x);
                   double resid = 0.0;
                   for (double y : b.y_obs) resid += y - t.f;
                   const double c = resid / (b.sigma_noise * b.sigma_noise * t.g);
                   const double pp = 1.0 / (b.sigma_prior * b.sigma_prior);
                   return Vec{c * t.dg0 - pp * x[0], c * t.dg1 - pp * x[1]};
                 }},
      model.params());
}

Mat score_matrix(const TargetModel& model, const Mat& x) {
  if (x.cols() != model.dim()) {
    throw DimensionError("score_matrix: particles have dimension " + std::to_string(x.cols()) + ", model expects " +
                         std::to_string(model.dim()));
  }
  Mat y(x.rows(), x.cols());
  std::vector<std::exception_ptr> errors(x.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      y.set_row(i, score(model, x.row(i)));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const NumericError& e) {
      throw NumericError("score_matrix: row " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!y.all_finite()) throw NumericError("score_matrix: non-finite score");
  return y;
}

}  // namespace cvxwgd
