#include "cvxwgd/srelu_net.hpp"

#include <cmath>
#include <random>
#include <string>

#include "cvxwgd/errors.hpp"

namespace cvxwgd {

namespace {

void check_theta(const NetworkParams& t) {
  if (t.w.cols() != t.alpha.size()) throw DimensionError("network: W columns != alpha length");
  if (t.alpha.empty()) throw DimensionError("network: need at least one neuron");
  if (t.include_bias && t.w.rows() < 2) throw DimensionError("network: bias needs an input coordinate");
}

void check_input(const NetworkParams& t, std::size_t d) {
  check_theta(t);
  if (t.input_dim() != d) {
    throw DimensionError("network: input dimension " + std::to_string(d) + " != " + std::to_string(t.input_dim()));
  }
}

void check_data(const NetworkParams& t, const Mat& x, const Mat& y) {
  check_input(t, x.cols());
  if (y.rows() != x.rows() || y.cols() != x.cols()) throw DimensionError("objective: X and Y shapes differ");
  if (x.rows() == 0) throw DimensionError("objective: no particles");
}

// w_i^T [x; 1]
double preact(const NetworkParams& t, std::size_t i, std::span<const double> x) {
  double u = t.include_bias ? t.w(t.w.rows() - 1, i) : 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) u += t.w(k, i) * x[k];
  return u;
}

// squared norm of the input part of column i
double input_norm2(const NetworkParams& t, std::size_t i) {
  double s = 0.0;
  for (std::size_t k = 0; k < t.input_dim(); ++k) s += t.w(k, i) * t.w(k, i);
  return s;
}

double column_norm(const Mat& w, std::size_t i) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.rows(); ++k) s += w(k, i) * w(k, i);
  return std::sqrt(s);
}

}  // namespace

double phi(const NetworkParams& theta, std::span<const double> x) {
  check_input(theta, x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < theta.neurons(); ++i) s += theta.alpha[i] * srelu(preact(theta, i, x));
  return s;
}

Vec grad_phi(const NetworkParams& theta, std::span<const double> x) {
  check_input(theta, x.size());
  Vec g(x.size(), 0.0);
  for (std::size_t i = 0; i < theta.neurons(); ++i) {
    const double c = theta.alpha[i] * srelu_d1(preact(theta, i, x));
    if (c == 0.0) continue;
    for (std::size_t k = 0; k < x.size(); ++k) g[k] += c * theta.w(k, i);
  }
  return g;
}

double lap_phi(const NetworkParams& theta, std::span<const double> x) {
  check_input(theta, x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < theta.neurons(); ++i) {
    s += theta.alpha[i] * input_norm2(theta, i) * srelu_d2(preact(theta, i, x));
  }
  return s;
}

double objective(const NetworkParams& theta, const Mat& x, const Mat& y, double beta) {
  check_data(theta, x, y);
  const std::size_t n = x.rows();
  double data = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const Vec g = grad_phi(theta, x.row(p));
    data += 0.5 * dot(g, g) + dot(g, y.row(p)) + lap_phi(theta, x.row(p));
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < theta.neurons(); ++i) {
    const double wn = column_norm(theta.w, i);
    reg += wn * wn * wn + std::pow(std::abs(theta.alpha[i]), 3);
  }
  return data / static_cast<double>(n) + 0.5 * beta * reg;
}

NetworkGrad objective_grad(const NetworkParams& theta, const Mat& x, const Mat& y, double beta) {
  check_data(theta, x, y);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t m = theta.neurons();
  const double inv_n = 1.0 / static_cast<double>(n);
  NetworkGrad grad{Mat(theta.w.rows(), m), Vec(m, 0.0)};

  Vec v(d);
  for (std::size_t p = 0; p < n; ++p) {
    const auto xp = x.row(p);
    const Vec g = grad_phi(theta, xp);
    for (std::size_t k = 0; k < d; ++k) v[k] = (g[k] + y(p, k)) * inv_n;
    for (std::size_t i = 0; i < m; ++i) {
      const double u = preact(theta, i, xp);
      if (u <= 0.0) continue;  // psi' = psi'' = 0
      const double d1 = srelu_d1(u);
      const double d2 = srelu_d2(u);
      const double a = theta.alpha[i];
      double vw = 0.0;
      for (std::size_t k = 0; k < d; ++k) vw += v[k] * theta.w(k, i);
      const double wn2 = input_norm2(theta, i);
      grad.alpha[i] += vw * d1 + inv_n * wn2 * d2;
      // d/dw_i of <v, alpha w_i psi'(w_i.xhat)> and of (1/N) alpha |Pw_i|^2 psi''
      for (std::size_t k = 0; k < d; ++k) {
        grad.w(k, i) += a * (d1 * v[k] + d2 * vw * xp[k]) + inv_n * a * 2.0 * theta.w(k, i) * d2;
      }
      if (theta.include_bias) grad.w(d, i) += a * d2 * vw;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double wn = column_norm(theta.w, i);
    for (std::size_t k = 0; k < theta.w.rows(); ++k) grad.w(k, i) += 1.5 * beta * wn * theta.w(k, i);
    grad.alpha[i] += 1.5 * beta * theta.alpha[i] * std::abs(theta.alpha[i]);
  }
  return grad;
}

NetworkParams rescale_unit_norm(const NetworkParams& theta) {
  check_theta(theta);
  NetworkParams out = theta;
  for (std::size_t i = 0; i < theta.neurons(); ++i) {
    const double wn = column_norm(theta.w, i);
    if (wn == 0.0) continue;
    for (std::size_t k = 0; k < theta.w.rows(); ++k) out.w(k, i) = theta.w(k, i) / wn;
    out.alpha[i] = theta.alpha[i] * wn * wn;
  }
  return out;
}

double rescaled_objective(const NetworkParams& theta, const Mat& x, const Mat& y, double beta_tilde) {
  check_data(theta, x, y);
  double s = 0.0;
  for (std::size_t p = 0; p < x.rows(); ++p) {
    const Vec z = grad_phi(theta, x.row(p));
    s += 0.5 * dot(z, z) + dot(z, y.row(p)) + lap_phi(theta, x.row(p));
  }
  for (double a : theta.alpha) s += beta_tilde * std::abs(a);
  return s;
}

double beta_tilde_from_beta(std::size_t n_particles, double beta) {
  return 3.0 * std::pow(2.0, -5.0 / 3.0) * static_cast<double>(n_particles) * beta;
}

NetworkParams init_network(std::size_t dim, std::size_t neurons, std::uint64_t seed, bool include_bias) {
  if (dim == 0 || neurons == 0) throw DimensionError("init_network: empty network");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t rows = dim + (include_bias ? 1 : 0);
  NetworkParams t{Mat(rows, neurons), Vec(neurons), include_bias};
  const double ws = 1.0 / std::sqrt(static_cast<double>(dim));
  const double as = 1.0 / std::sqrt(static_cast<double>(neurons));
  for (std::size_t i = 0; i < neurons; ++i) {
    for (std::size_t k = 0; k < rows; ++k) t.w(k, i) = ws * normal(rng);
    t.alpha[i] = as * normal(rng);
  }
  return t;
}

NetworkParams train_adam(const NetworkParams& theta0, const Mat& x, const Mat& y, double beta,
                         const AdamSettings& s) {
  check_data(theta0, x, y);
  NetworkParams theta = theta0;
  if (s.iters <= 0 || s.lr == 0.0) return theta;

  const std::size_t nw = theta.w.size();
  const std::size_t np = nw + theta.alpha.size();
  Vec m1(np, 0.0), m2(np, 0.0);
  double b1t = 1.0, b2t = 1.0;
  for (int it = 0; it < s.iters; ++it) {
    const NetworkGrad g = objective_grad(theta, x, y, beta);
    b1t *= s.beta1;
    b2t *= s.beta2;
    auto step = [&](std::size_t idx, double gi, double& param) {
      if (!std::isfinite(gi)) throw NumericError("train_adam: non-finite gradient at step " + std::to_string(it));
      m1[idx] = s.beta1 * m1[idx] + (1.0 - s.beta1) * gi;
      m2[idx] = s.beta2 * m2[idx] + (1.0 - s.beta2) * gi * gi;
      const double mh = m1[idx] / (1.0 - b1t);
      const double vh = m2[idx] / (1.0 - b2t);
      param -= s.lr * mh / (std::sqrt(vh) + s.eps);
    };
    auto wdata = theta.w.data();
    for (std::size_t k = 0; k < nw; ++k) step(k, g.w.data()[k], wdata[k]);
    for (std::size_t i = 0; i < theta.alpha.size(); ++i) step(nw + i, g.alpha[i], theta.alpha[i]);
  }
  const double obj = objective(theta, x, y, beta);
  if (!std::isfinite(obj)) throw NumericError("train_adam: objective is not finite after training");
  return theta;
}

}  // namespace cvxwgd
