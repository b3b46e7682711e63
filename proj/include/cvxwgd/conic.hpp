#pragma once

// ADMM solver for quadratic-objective conic programs
//
//   minimize    1/2 z^T P z + q^T z
//   subject to  b - A z in K,   K = product of zero, nonnegative and PSD cones.
//
// PSD blocks are stored in svec form (see densela.hpp). Each iteration solves
// one quasi-definite linear system with a factorization cached across
// iterations, projects onto K and takes a scaled dual step.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cvxwgd/densela.hpp"

namespace cvxwgd {

using SparseMat = Eigen::SparseMatrix<double>;

enum class ConeKind { zero, nonneg, psd };

struct Cone {
  ConeKind kind;
  std::size_t length;  // rows covered by this cone
  std::size_t order;   // matrix order for psd, 0 otherwise

  static Cone zero(std::size_t len) { return {ConeKind::zero, len, 0}; }
  static Cone nonneg(std::size_t len) { return {ConeKind::nonneg, len, 0}; }
  static Cone psd(std::size_t k) { return {ConeKind::psd, svec_length(k), k}; }
};

struct ConicProblem {
  SparseMat p;  // n x n symmetric PSD (full storage)
  Vec q;
  SparseMat a;  // m x n
  Vec b;
  std::vector<Cone> cones;

  std::size_t num_vars() const { return q.size(); }
  std::size_t num_rows() const { return b.size(); }
  /// Throws DimensionError when shapes or cone lengths disagree.
  void validate() const;
  double objective(std::span<const double> z) const;
};

enum class SolveStatus { optimal, max_iters, infeasible_suspect };
std::string to_string(SolveStatus s);

struct SolveResult {
  Vec z;
  Vec dual;   // in the dual cone K*, stationarity P z + q + A^T dual = 0
  Vec slack;  // b - A z projected onto K
  SolveStatus status = SolveStatus::max_iters;
  double primal_residual = 0.0;  // |A z + s - b|_inf
  double dual_residual = 0.0;    // |P z + q + A^T dual|_inf
  double objective = 0.0;
  int iterations = 0;
};

enum class LinearSolverKind { automatic, dense, sparse };

struct SolverSettings {
  double rho = 1.0;
  double sigma = 1e-6;
  double alpha_relax = 1.6;
  double eps_abs = 1e-7;
  double eps_rel = 1e-7;
  int max_iters = 50000;
  int infeas_check_every = 200;
  int check_every = 5;
  bool adaptive_rho = true;
  int adapt_every = 50;
  double eps_infeasible = 1e-5;
  LinearSolverKind linear_solver = LinearSolverKind::automatic;
  std::size_t dense_max_vars = 100;  // automatic picks dense at or below this size
  bool parallel_projection = true;
  std::string trace_path;  // iteration trace CSV when non-empty

  void validate() const;
};

/// Optional starting point (z, s, y) from a previous solve.
struct WarmStart {
  Vec z;
  Vec slack;
  Vec dual;
};

/// Euclidean projection onto the cone product, block by block.
Vec project_cone(std::span<const double> v, std::span<const Cone> cones, bool parallel = true);

SolveResult solve(const ConicProblem& problem, const SolverSettings& settings = {},
                  const WarmStart* warm = nullptr);

/// Sparse triplet text dump, see docs/problem_format.md.
void dump_problem(std::ostream& os, const ConicProblem& problem);

SparseMat sparse_from_dense(const Mat& m);
Mat dense_from_sparse(const SparseMat& m);

}  // namespace cvxwgd
