#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "cvxwgd/densela.hpp"
#include "cvxwgd/errors.hpp"

using namespace cvxwgd;
using testutil::random_mat;
using testutil::random_sym;

namespace {

Mat reconstruct(const SymEig& e) {
  const std::size_t k = e.eigenvalues.size();
  Mat lam(k, k);
  for (std::size_t i = 0; i < k; ++i) lam(i, i) = e.eigenvalues[i];
  return matmul(matmul(e.eigenvectors, lam), e.eigenvectors.transpose());
}

}  // namespace

TEST_CASE("eig_sym diagonal input") {
  const SymEig e = eig_sym(Mat{{3, 0}, {0, 1}});
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(3.0));
  CHECK(std::abs(e.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.eigenvectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("eig_sym identity") {
  const SymEig e = eig_sym(Mat::identity(4));
  for (double v : e.eigenvalues) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("eig_sym reconstruction and orthonormality") {
  std::mt19937_64 rng(11);
  for (std::size_t k : {2u, 3u, 6u, 11u, 25u, 50u}) {
    const Mat a = random_sym(k, rng);
    const SymEig e = eig_sym(a);
    CHECK(frobenius_norm(reconstruct(e) - a) / frobenius_norm(a) < 1e-10);
    const Mat vtv = matmul(e.eigenvectors.transpose(), e.eigenvectors);
    CHECK(max_abs(vtv - Mat::identity(k)) < 1e-10);
    for (std::size_t i = 1; i < k; ++i) CHECK(e.eigenvalues[i - 1] <= e.eigenvalues[i]);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t r = 0; r < k; ++r) {
        if (std::abs(e.eigenvectors(r, c)) > 1e-12) {
          CHECK(e.eigenvectors(r, c) > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("eig_sym rejects non-square input") {
  CHECK_THROWS_AS(eig_sym(Mat(2, 3)), DimensionError);
}

TEST_CASE("svec known values") {
  const Vec a = svec(Mat::identity(2));
  CHECK(a == Vec{1, 0, 1});
  const Vec b = svec(Mat{{0, 1}, {1, 0}});
  CHECK(b[0] == 0.0);
  CHECK(b[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(b[2] == 0.0);
  CHECK_THROWS_AS(svec(Mat(2, 3)), DimensionError);
}

TEST_CASE("svec inner product equals trace pairing") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const Mat a = random_sym(4, rng);
    const Mat b = random_sym(4, rng);
    CHECK(std::abs(dot(svec(a), svec(b)) - trace(matmul(a, b))) < 1e-12);
  }
}

TEST_CASE("smat inverts svec") {
  CHECK(smat(Vec{1, 0, 1}) == Mat::identity(2));
  const Mat off = smat(Vec{0, std::sqrt(2.0), 0});
  CHECK(off(0, 1) == doctest::Approx(1.0));
  CHECK(off(1, 0) == doctest::Approx(1.0));
  std::mt19937_64 rng(13);
  for (std::size_t k = 1; k <= 6; ++k) {
    const Mat a = random_sym(k, rng);
    CHECK(max_abs(smat(svec(a)) - a) < 1e-15);
  }
  CHECK_THROWS_AS(smat(Vec{1, 2}), DimensionError);
}

TEST_CASE("svec_index matches row-major upper triangle") {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i; j < 5; ++j) CHECK(svec_index(5, i, j) == pos++);
  }
}

TEST_CASE("chol_solve simple systems") {
  const Mat b{{1}, {2}, {3}};
  CHECK(chol_solve(Mat::identity(3), b) == b);
  const Mat x = chol_solve(Mat{{2, 0}, {0, 4}}, Mat{{2}, {4}});
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("chol_solve residual on random SPD systems") {
  std::mt19937_64 rng(14);
  for (std::size_t n : {5u, 40u, 200u}) {
    const Mat g = random_mat(n, n, rng);
    const Mat a = matmul(g.transpose(), g) + Mat::identity(n);
    const Mat b = random_mat(n, 3, rng);
    const Mat x = chol_solve(a, b);
    CHECK(frobenius_norm(matmul(a, x) - b) / frobenius_norm(b) < 1e-10);
  }
}

TEST_CASE("chol_solve rejects indefinite matrices") {
  CHECK_THROWS_AS(chol_solve(Mat{{1, 2}, {2, 1}}, Mat{{1}, {1}}), NumericError);
}

TEST_CASE("Cholesky log determinant") {
  const Cholesky c(Mat{{4, 0}, {0, 9}});
  CHECK(c.log_det() == doctest::Approx(std::log(36.0)));
}

TEST_CASE("Mat shape checks") {
  Mat a(2, 2);
  CHECK_THROWS_AS(a += Mat(3, 2), DimensionError);
  CHECK_THROWS_AS(matmul(Mat(2, 3), Mat(2, 3)), DimensionError);
}
