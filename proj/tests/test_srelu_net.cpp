#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "cvxwgd/errors.hpp"
#include "cvxwgd/srelu_net.hpp"

using namespace cvxwgd;

namespace {

NetworkParams random_theta(std::size_t d, std::size_t m, std::mt19937_64& rng, bool bias = false) {
  NetworkParams t{testutil::random_mat(d + (bias ? 1 : 0), m, rng), testutil::random_vec(m, rng), bias};
  return t;
}

bool off_kinks(const NetworkParams& t, std::span<const double> x, double margin = 1e-3) {
  for (std::size_t i = 0; i < t.neurons(); ++i) {
    double u = t.include_bias ? t.w(t.w.rows() - 1, i) : 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) u += t.w(k, i) * x[k];
    if (std::abs(u) < margin) return false;
  }
  return true;
}

Vec point_off_kinks(const NetworkParams& t, std::size_t d, std::mt19937_64& rng) {
  Vec x;
  do {
    x = testutil::random_vec(d, rng);
  } while (!off_kinks(t, x));
  return x;
}

NetworkParams single(Vec w, double a) {
  const std::size_t d = w.size();
  return NetworkParams{Mat(d, 1, std::move(w)), Vec{a}, false};
}

}  // namespace

TEST_CASE("phi, grad and Laplacian on a single neuron") {
  const NetworkParams t = single({1, 0}, 1.0);
  CHECK(phi(t, Vec{2, 0}) == doctest::Approx(4.0));
  CHECK(phi(t, Vec{-1, 0}) == 0.0);
  const Vec g = grad_phi(t, Vec{2, 0});
  CHECK(g[0] == doctest::Approx(4.0));
  CHECK(g[1] == 0.0);
  const Vec z = grad_phi(t, Vec{-1, 0});
  CHECK(z == Vec{0, 0});
  CHECK(lap_phi(t, Vec{2, 0}) == doctest::Approx(2.0));
  CHECK(lap_phi(single({0.6, 0.8}, 0.5), Vec{1, 1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(phi(t, Vec{1, 2, 3}), DimensionError);
}

TEST_CASE("phi matches the direct neuron sum") {
  std::mt19937_64 rng(41);
  const NetworkParams t = random_theta(3, 7, rng);
  for (int r = 0; r < 10; ++r) {
    const Vec x = testutil::random_vec(3, rng);
    double s = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
      double u = 0.0;
      for (std::size_t k = 0; k < 3; ++k) u += t.w(k, i) * x[k];
      s += t.alpha[i] * std::max(u, 0.0) * std::max(u, 0.0);
    }
    CHECK(phi(t, x) == doctest::Approx(s).epsilon(1e-13));
  }
}

TEST_CASE("grad_phi and lap_phi against finite differences") {
  std::mt19937_64 rng(42);
  for (bool bias : {false, true}) {
    for (int r = 0; r < 10; ++r) {
      const NetworkParams t = random_theta(3, 6, rng, bias);
      const Vec x = point_off_kinks(t, 3, rng);
      const Vec g = grad_phi(t, x);
      const double h = 1e-5;
      double lap = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        Vec a = x, b = x;
        a[k] += h;
        b[k] -= h;
        const double fd = (phi(t, a) - phi(t, b)) / (2 * h);
        CHECK(std::abs(fd - g[k]) <= 1e-6 * std::max(1.0, std::abs(g[k])));
        lap += (phi(t, a) - 2 * phi(t, x) + phi(t, b)) / (h * h);
      }
      CHECK(std::abs(lap - lap_phi(t, x)) <= 1e-4 * std::max(1.0, std::abs(lap)));
    }
  }
}

TEST_CASE("objective term by term") {
  const NetworkParams t = single({1, 0}, 1.0);
  const Mat x{{1, 0}};
  const Mat y{{-1, 0}};
  CHECK(objective(t, x, y, 1.0) == doctest::Approx(3.0));
  NetworkParams z = t;
  z.alpha[0] = 0.0;
  CHECK(objective(z, x, y, 2.0) == doctest::Approx(1.0));
  const NetworkParams off = single({-1, 0}, 1.0);
  CHECK(objective(off, x, y, 0.0) == 0.0);
}

TEST_CASE("objective_grad against finite differences") {
  std::mt19937_64 rng(43);
  for (bool bias : {false, true}) {
    for (int r = 0; r < 5; ++r) {
      NetworkParams t = random_theta(2, 5, rng, bias);
      Mat x(8, 2);
      for (std::size_t n = 0; n < 8; ++n) x.set_row(n, point_off_kinks(t, 2, rng));
      const Mat y = testutil::random_mat(8, 2, rng);
      const double beta = 0.7;
      const NetworkGrad g = objective_grad(t, x, y, beta);
      const double h = 1e-6;
      for (std::size_t k = 0; k < t.w.size(); ++k) {
        NetworkParams a = t, b = t;
        a.w.data()[k] += h;
        b.w.data()[k] -= h;
        const double fd = (objective(a, x, y, beta) - objective(b, x, y, beta)) / (2 * h);
        CHECK(std::abs(fd - g.w.data()[k]) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
      for (std::size_t i = 0; i < t.neurons(); ++i) {
        NetworkParams a = t, b = t;
        a.alpha[i] += h;
        b.alpha[i] -= h;
        const double fd = (objective(a, x, y, beta) - objective(b, x, y, beta)) / (2 * h);
        CHECK(std::abs(fd - g.alpha[i]) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("regularizer gradient") {
  NetworkParams zero{Mat(2, 3), Vec(3, 0.0), false};
  const Mat x{{1, 1}};
  const Mat y{{0, 0}};
  const NetworkGrad g = objective_grad(zero, x, y, 1.0);
  CHECK(max_abs(g.w) == 0.0);
  for (double a : g.alpha) CHECK(a == 0.0);
  // all neurons inactive: only the cubic term remains in d/dalpha
  NetworkParams t = single({-1, 0}, -0.8);
  const NetworkGrad h = objective_grad(t, Mat{{1, 0}}, Mat{{0, 0}}, 2.0);
  CHECK(h.alpha[0] == doctest::Approx(1.5 * 2.0 * -0.8 * 0.8));
}

TEST_CASE("rescale_unit_norm") {
  const NetworkParams t = rescale_unit_norm(single({2, 0}, 3.0));
  CHECK(t.w(0, 0) == doctest::Approx(1.0));
  CHECK(t.w(1, 0) == 0.0);
  CHECK(t.alpha[0] == doctest::Approx(12.0));
  const NetworkParams u = single({0.6, 0.8}, 0.5);
  const NetworkParams v = rescale_unit_norm(u);
  CHECK(max_abs(v.w - u.w) < 1e-15);
  CHECK(v.alpha[0] == doctest::Approx(0.5));

  std::mt19937_64 rng(44);
  const NetworkParams r = random_theta(3, 9, rng);
  const NetworkParams s = rescale_unit_norm(r);
  for (int k = 0; k < 20; ++k) {
    const Vec x = testutil::random_vec(3, rng);
    CHECK(std::abs(phi(r, x) - phi(s, x)) <= 1e-12 * std::max(1.0, std::abs(phi(r, x))));
  }
}

TEST_CASE("beta tilde conversion") {
  CHECK(std::abs(beta_tilde_from_beta(50, 1.0) - 150.0 * std::pow(2.0, -5.0 / 3.0)) < 1e-9);
  CHECK(beta_tilde_from_beta(50, 1.0) == doctest::Approx(47.247).epsilon(1e-4));
}

TEST_CASE("adam trivial cases") {
  std::mt19937_64 rng(45);
  const NetworkParams t0 = init_network(2, 10, 5);
  const Mat x = testutil::random_mat(6, 2, rng);
  const Mat y = x * -1.0;
  const NetworkParams a = train_adam(t0, x, y, 1.0, 1e-3, 0);
  CHECK(a.w == t0.w);
  CHECK(a.alpha == t0.alpha);
  const NetworkParams b = train_adam(t0, x, y, 1.0, 0.0, 50);
  CHECK(b.w == t0.w);
  CHECK(b.alpha == t0.alpha);
}

TEST_CASE("adam decreases the objective") {
  const NetworkParams t0 = init_network(2, 20, 9);
  const Mat x{{0.3, -0.4}};
  const Mat y{{-0.3, 0.4}};
  const NetworkParams t = train_adam(t0, x, y, 0.0, 1e-3, 200);
  CHECK(objective(t, x, y, 0.0) <= objective(t0, x, y, 0.0));
  const NetworkParams again = train_adam(t0, x, y, 0.0, 1e-3, 200);
  CHECK(again.w == t.w);
}

TEST_CASE("init_network is seeded") {
  const NetworkParams a = init_network(3, 50, 1);
  const NetworkParams b = init_network(3, 50, 1);
  const NetworkParams c = init_network(3, 50, 2);
  CHECK(a.w == b.w);
  CHECK(a.alpha == b.alpha);
  CHECK_FALSE(a.w == c.w);
}

TEST_CASE("integration by parts under a standard normal") {
  std::mt19937_64 rng(46);
  const NetworkParams t = random_theta(2, 4, rng);
  std::normal_distribution<double> g;
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec x{g(rng), g(rng)};
    const Vec gp = grad_phi(t, x);
    const double v = -(x[0] * gp[0] + x[1] * gp[1]) + lap_phi(t, x);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean) < 4 * se);
}
