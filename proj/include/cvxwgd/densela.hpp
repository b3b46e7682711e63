#pragma once

// Small dense real linear algebra: row-major matrices, a cyclic Jacobi
// eigensolver, isometric symmetric vectorization and a Cholesky solver.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cvxwgd {

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, Vec data);
  /// Row-by-row literal, e.g. Mat{{1, 2}, {3, 4}}.
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat diag(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vec row_vec(std::size_t i) const;
  void set_row(std::size_t i, std::span<const double> v);

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const Vec& vec() const { return data_; }

  Mat transpose() const;
  bool all_finite() const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(Mat a, double s);
Mat operator*(double s, Mat a);

Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, std::span<const double> x);
double frobenius_norm(const Mat& a);
/// Frobenius inner product sum_ij a_ij b_ij.
double frobenius_dot(const Mat& a, const Mat& b);
double trace(const Mat& a);
double max_abs(const Mat& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct SymEig {
  Vec eigenvalues;  // ascending
  Mat eigenvectors;  // columns are orthonormal eigenvectors
};

/// Spectral decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// The input is symmetrized first. Eigenvalues ascend; each eigenvector has
/// its first nonzero entry positive.
SymEig eig_sym(const Mat& a);

/// Jacobi iteration limits.
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTol = 1e-12;

/// Upper triangle, row by row, off-diagonals scaled by sqrt(2) so that
/// <svec(A), svec(B)> = tr(AB).
Vec svec(const Mat& s);
Mat smat(std::span<const double> v);
std::size_t svec_length(std::size_t k);
/// Matrix order k for a triangular-number length, or throws DimensionError.
std::size_t smat_order(std::size_t len);
/// Position of entry (i, j), i <= j, inside svec of a k x k matrix.
std::size_t svec_index(std::size_t k, std::size_t i, std::size_t j);

/// Solves a x = b for symmetric positive definite a (b may have many columns).
Mat chol_solve(const Mat& a, const Mat& b);

/// Lower Cholesky factor that can be reused for repeated solves.
class Cholesky {
 public:
  explicit Cholesky(const Mat& a);
  void solve_in_place(std::span<double> b) const;
  std::size_t order() const { return l_.rows(); }
  double log_det() const;

 private:
  Mat l_;
};

}  // namespace cvxwgd
