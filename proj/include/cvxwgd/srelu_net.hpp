#pragma once

// Two-layer squared-ReLU network Phi(x) = alpha^T psi(W^T x) with
// psi(z) = max(z, 0)^2, its input gradient and Laplacian, the regularized
// variational objective and a plain Adam trainer.

#include <cstdint>
#include <span>

#include "cvxwgd/densela.hpp"

namespace cvxwgd {

inline double srelu(double z) { return z > 0.0 ? z * z : 0.0; }
inline double srelu_d1(double z) { return z > 0.0 ? 2.0 * z : 0.0; }
/// Second derivative with the convention psi''(0) = 0.
inline double srelu_d2(double z) { return z > 0.0 ? 2.0 : 0.0; }

struct NetworkParams {
  Mat w;       // (d [+1]) x m, column i is neuron i
  Vec alpha;   // m
  bool include_bias = false;  // inputs get a trailing constant-1 coordinate

  std::size_t neurons() const { return alpha.size(); }
  std::size_t input_dim() const { return w.rows() - (include_bias ? 1 : 0); }
};

struct NetworkGrad {
  Mat w;
  Vec alpha;
};

double phi(const NetworkParams& theta, std::span<const double> x);
Vec grad_phi(const NetworkParams& theta, std::span<const double> x);
double lap_phi(const NetworkParams& theta, std::span<const double> x);

/// (1/2N) sum |grad Phi(x_n)|^2 + (1/N) sum <grad Phi(x_n), y_n>
///   + (1/N) sum lap Phi(x_n) + (beta/2) sum (|w_i|^3 + |alpha_i|^3)
double objective(const NetworkParams& theta, const Mat& x, const Mat& y, double beta);
NetworkGrad objective_grad(const NetworkParams& theta, const Mat& x, const Mat& y, double beta);

/// Per-neuron rescaling to |w_i| = 1, alpha_i <- |w_i|^2 alpha_i. Zero columns
/// are left alone. Phi and its derivatives are unchanged.
NetworkParams rescale_unit_norm(const NetworkParams& theta);

/// N times the regularized objective after optimal per-neuron rescaling:
/// 1/2 sum |z_n|^2 + sum_n sum_i alpha_i |w_i|^2 psi''(w_i.x_n)
///   + sum <z_n, y_n> + beta_tilde |alpha|_1
double rescaled_objective(const NetworkParams& theta, const Mat& x, const Mat& y, double beta_tilde);

/// beta_tilde = 3 * 2^(-5/3) * N * beta.
double beta_tilde_from_beta(std::size_t n_particles, double beta);

/// w_i ~ N(0, I/d), alpha_i ~ N(0, 1/m).
NetworkParams init_network(std::size_t dim, std::size_t neurons, std::uint64_t seed, bool include_bias = false);

struct AdamSettings {
  double lr = 1e-3;
  int iters = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

NetworkParams train_adam(const NetworkParams& theta0, const Mat& x, const Mat& y, double beta,
                         const AdamSettings& settings);
inline NetworkParams train_adam(const NetworkParams& theta0, const Mat& x, const Mat& y, double beta, double lr,
                                int sub_iters) {
  return train_adam(theta0, x, y, beta, AdamSettings{.lr = lr, .iters = sub_iters});
}

}  // namespace cvxwgd
