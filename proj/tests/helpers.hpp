#pragma once

#include <cstdint>
#include <random>

#include "cvxwgd/densela.hpp"

namespace testutil {

inline cvxwgd::Mat random_mat(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  cvxwgd::Mat m(r, c);
  for (auto& v : m.data()) v = g(rng);
  return m;
}

inline cvxwgd::Mat random_sym(std::size_t k, std::mt19937_64& rng) {
  cvxwgd::Mat a = random_mat(k, k, rng);
  return (a + a.transpose()) * 0.5;
}

inline cvxwgd::Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  cvxwgd::Vec v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace testutil
