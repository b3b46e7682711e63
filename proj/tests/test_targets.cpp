#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "cvxwgd/errors.hpp"
#include "cvxwgd/targets.hpp"

using namespace cvxwgd;

namespace {

Vec fd_score(const TargetModel& m, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    Vec a = x, b = x;
    a[c] += h;
    b[c] -= h;
    g[c] = (log_density(m, a) - log_density(m, b)) / (2 * h);
  }
  return g;
}

void check_fd(const TargetModel& m, std::mt19937_64& rng, int points, double scale) {
  for (int t = 0; t < points; ++t) {
    const Vec x = testutil::random_vec(m.dim(), rng, scale);
    const Vec s = score(m, x);
    const Vec f = fd_score(m, x);
    for (std::size_t c = 0; c < x.size(); ++c) {
      CHECK(std::abs(s[c] - f[c]) <= 1e-4 * std::max(1.0, std::abs(s[c])));
    }
  }
}

TargetModel symmetric_mixture(double a) {
  return TargetModel::gaussian_mixture({0.5, 0.5}, {{a, 0.0}, {-a, 0.0}}, {Mat::identity(2), Mat::identity(2)});
}

}  // namespace

TEST_CASE("standard normal log density and score") {
  const TargetModel m = TargetModel::standard_normal(2);
  CHECK(log_density(m, Vec{0, 0}) == doctest::Approx(0.0));
  CHECK(log_density(m, Vec{1, 2}) == doctest::Approx(-2.5));
  const Vec s = score(m, Vec{1, 2});
  CHECK(s[0] == doctest::Approx(-1.0));
  CHECK(s[1] == doctest::Approx(-2.0));
  CHECK_THROWS_AS(score(m, Vec{1, 2, 3}), DimensionError);
}

TEST_CASE("mixture symmetry") {
  const TargetModel m = symmetric_mixture(1.5);
  CHECK(log_density(m, Vec{0.3, -0.7}) == doctest::Approx(log_density(m, Vec{-0.3, 0.7})));
  const Vec s = score(m, Vec{0, 0});
  CHECK(std::abs(s[0]) < 1e-15);
  CHECK(std::abs(s[1]) < 1e-15);
  CHECK_THROWS(TargetModel::gaussian_mixture({0.3, 0.3}, {{0.0}, {1.0}}, {Mat::identity(1), Mat::identity(1)}));
}

TEST_CASE("scores match finite differences") {
  std::mt19937_64 rng(31);
  check_fd(TargetModel::gaussian({1.0, -2.0}, Mat{{2.0, 0.3}, {0.3, 0.5}}), rng, 20, 1.0);
  check_fd(symmetric_mixture(2.0), rng, 20, 2.0);
  check_fd(TargetModel::double_banana_default(), rng, 20, 1.0);
}

TEST_CASE("gaussian score is affine") {
  const TargetModel m = TargetModel::gaussian({1.0, -2.0}, Mat{{2.0, 0.3}, {0.3, 0.5}});
  const Vec x{0.4, 1.1}, y{-2.0, 0.5};
  const Vec sxy = score(m, Vec{x[0] + y[0], x[1] + y[1]});
  const Vec sx = score(m, x), sy = score(m, y), s0 = score(m, Vec{0, 0});
  for (int c = 0; c < 2; ++c) CHECK(std::abs(sxy[c] - sx[c] - sy[c] + s0[c]) < 1e-12);
}

TEST_CASE("banana score undefined where the forward map degenerates") {
  const TargetModel m = TargetModel::double_banana_default();
  CHECK_THROWS_AS(score(m, Vec{1.0, 1.0}), NumericError);
}

TEST_CASE("score matrix is row-wise score") {
  const TargetModel n = TargetModel::standard_normal(2);
  const Mat y = score_matrix(n, Mat{{1, 0}, {0, 1}});
  CHECK(y == Mat{{-1, 0}, {0, -1}});
  const TargetModel b = TargetModel::double_banana_default();
  std::mt19937_64 rng(32);
  const Mat x = testutil::random_mat(17, 2, rng);
  const Mat yb = score_matrix(b, x);
  for (std::size_t i = 0; i < x.rows(); ++i) CHECK(yb.row_vec(i) == score(b, x.row(i)));
  const Mat one = score_matrix(b, Mat{{0.2, 0.4}});
  CHECK(one.row_vec(0) == score(b, Vec{0.2, 0.4}));
}

TEST_CASE("score matrix error names the row") {
  const TargetModel b = TargetModel::double_banana_default();
  try {
    (void)score_matrix(b, Mat{{0.0, 0.0}, {1.0, 1.0}});
    FAIL("expected an error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("double banana posterior is bimodal") {
  const TargetModel m = TargetModel::double_banana_default();
  std::vector<Vec> modes;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      Vec x{-1.47 + 0.5 * i, -1.53 + 0.5 * j};
      double lr = 1e-3;
      double lp = log_density(m, x);
      for (int it = 0; it < 20000; ++it) {
        const Vec g = score(m, x);
        const Vec xn{x[0] + lr * g[0], x[1] + lr * g[1]};
        const double ln = log_density(m, xn);
        if (ln >= lp) {
          x = xn;
          lp = ln;
          lr *= 1.1;
        } else {
          lr *= 0.5;
        }
        if (lr < 1e-14) break;
      }
      bool known = false;
      for (const auto& mo : modes) known = known || std::hypot(mo[0] - x[0], mo[1] - x[1]) < 0.2;
      if (!known) modes.push_back(x);
    }
  }
  CHECK(modes.size() >= 2);
}
