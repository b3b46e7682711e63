#pragma once

// Relaxed dual SDP of the regularized squared-ReLU variational problem.
//
// For every activation pattern D_j the relaxed dual carries two LMIs of order
// d + 1,
//
//    A_j(L) + B_j + sum_n r-_n H_n + bt E >= 0
//   -A_j(L) - B_j + sum_n r+_n H_n + bt E >= 0,      r-, r+ >= 0,
//
// with A_j(L) = -L^T D_j X - X^T D_j L (padded), B_j = 2 tr(D_j) I_d (padded),
// H_0 = diag(I_d, -1), H_n = (1 - 2 D_j[n]) [0 x_n; x_n^T 0] and
// E = e_{d+1} e_{d+1}^T. The objective is max -1/2 |L + Y|_F^2. Its solution
// L* gives the particle displacement direction L* + Y.

#include <cstddef>
#include <vector>

#include "cvxwgd/arrangements.hpp"
#include "cvxwgd/conic.hpp"
#include "cvxwgd/densela.hpp"
#include "cvxwgd/srelu_net.hpp"

namespace cvxwgd {

struct ConstraintBlock {
  Pattern d;
  Mat b_tilde;         // (d+1) x (d+1)
  std::vector<Mat> h;  // H_0, H_1, ..., H_N
  Mat e;               // e_{d+1} e_{d+1}^T
};

/// d x d matrix -L^T D X - X^T D L.
Mat apply_Aj(const Mat& lambda, const Mat& x, const Pattern& d);
/// apply_Aj padded with a zero last row and column.
Mat apply_Aj_tilde(const Mat& lambda, const Mat& x, const Pattern& d);
/// Adjoint of the padded operator: -2 D X S[0:d, 0:d].
Mat adjoint_Aj(const Mat& s, const Mat& x, const Pattern& d);

std::vector<ConstraintBlock> build_blocks(const Mat& x, const ArrangementSet& arrangements);

/// Variable layout of the encoded problems:
///   [ vec(L) row-major (N d) | r-^(1..p) (N+1 each) | r+^(1..p) (N+1 each) | bt ]
/// bt is present only in the threshold problem. Rows: all r >= 0 first, then the
/// PSD blocks in the order (1,-), (1,+), (2,-), (2,+), ...
struct DualLayout {
  std::size_t n;
  std::size_t d;
  std::size_t p;
  bool beta_variable = false;

  std::size_t lambda_size() const { return n * d; }
  std::size_t r_minus(std::size_t j) const { return lambda_size() + j * (n + 1); }
  std::size_t r_plus(std::size_t j) const { return lambda_size() + (p + j) * (n + 1); }
  std::size_t beta_index() const { return lambda_size() + 2 * p * (n + 1); }
  std::size_t num_vars() const { return beta_index() + (beta_variable ? 1 : 0); }
};

struct RelaxedDualProblem {
  Mat x;
  Mat y;
  double beta_tilde;
  std::vector<ConstraintBlock> blocks;

  DualLayout layout() const { return {x.rows(), x.cols(), blocks.size(), false}; }
};

ConicProblem encode_relaxed_dual(const RelaxedDualProblem& problem);

struct RelaxedDualSolution {
  Mat lambda;
  double value;  // -1/2 |L + Y|_F^2
  SolveStatus status;
  SolveResult raw;
};

RelaxedDualSolution solve_relaxed_dual(const RelaxedDualProblem& problem, const SolverSettings& settings = {},
                                       const WarmStart* warm = nullptr);

/// minimize bt over (bt, L, r) subject to the relaxed-dual LMIs. Independent of Y.
ConicProblem encode_beta_min(const Mat& x, const std::vector<ConstraintBlock>& blocks);

struct BetaMinResult {
  double beta_tilde_min;
  SolveStatus status;
  Mat lambda;
  SolveResult raw;
};

BetaMinResult solve_beta_min(const Mat& x, const std::vector<ConstraintBlock>& blocks,
                             const SolverSettings& settings = {}, const WarmStart* warm = nullptr);

struct LambdaFeasibility {
  bool feasible;
  double worst_slack;  // min over blocks of the best achievable lambda_min
  std::size_t worst_block;
};

/// For fixed L, solves per block: max t s.t. +-(A_j(L) + B_j) + sum r_n H_n + bt E >= t I,
/// r >= 0. Feasible iff every block reaches t >= -tol.
LambdaFeasibility check_lambda_feasible(const Mat& lambda, const Mat& x, const std::vector<ConstraintBlock>& blocks,
                                        double beta_tilde, const SolverSettings& settings = {},
                                        double tol = 1e-8);

/// Smallest bt for which L = -Y satisfies every relaxed-dual LMI. Above it the
/// relaxed dual optimum is 0 and the particles stop moving.
double shutdown_threshold(const Mat& y, const Mat& x, const std::vector<ConstraintBlock>& blocks,
                          const SolverSettings& settings = {});

/// Smallest bt for which a fixed L satisfies every relaxed-dual LMI.
double min_feasible_beta(const Mat& lambda, const Mat& x, const std::vector<ConstraintBlock>& blocks,
                         const SolverSettings& settings = {});

struct BidualCertificate {
  Mat z;                     // N x d
  std::vector<Mat> s_plus;   // one (d+1)^2 PSD matrix per pattern
  std::vector<Mat> s_minus;
};

/// 1/2 |Z + Y|^2 - 1/2 |Y|^2 + sum_j tr(B_j (S+ - S-)) + bt sum_j tr((S+ + S-) E)
double bidual_objective(const BidualCertificate& cert, const std::vector<ConstraintBlock>& blocks, const Mat& y,
                        double beta_tilde);

struct BidualReport {
  double z_residual;           // max |Z - sum_j A_j^*(S- - S+)|
  double max_trace_violation;  // max(0, tr(S H_n))
  double min_eigenvalue;       // over all S blocks

  bool feasible(double tol) const {
    return z_residual <= tol && max_trace_violation <= tol && min_eigenvalue >= -tol;
  }
};

BidualReport check_bidual_feasible(const BidualCertificate& cert, const std::vector<ConstraintBlock>& blocks,
                                   const Mat& x);

/// Maps a network with |w_i| <= 1 to a bidual-feasible certificate with equal
/// objective. Every pattern 1(X w_i >= 0) must be present in the arrangement set.
BidualCertificate lift_primal(const Mat& w, const Vec& alpha, const Mat& x, const ArrangementSet& arrangements);

/// Z with rows z_n = sum_i alpha_i w_i psi'(x_n . w_i).
Mat network_gradients(const Mat& w, const Vec& alpha, const Mat& x);

}  // namespace cvxwgd
