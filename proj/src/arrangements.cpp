#include "cvxwgd/arrangements.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "cvxwgd/errors.hpp"

namespace cvxwgd {

namespace {

ArrangementSet from_map(std::map<Pattern, Vec> found, ArrangementSource source) {
  ArrangementSet out;
  out.source = source;
  for (auto& [p, w] : found) {
    out.patterns.push_back(p);
    out.representative_ws.push_back(std::move(w));
  }
  return out;
}

}  // namespace

bool ArrangementSet::contains(const Pattern& p) const {
  return std::binary_search(patterns.begin(), patterns.end(), p);
}

Pattern activation_pattern(const Mat& x, std::span<const double> w) {
  if (w.size() != x.cols()) throw DimensionError("activation_pattern: direction length mismatch");
  Pattern p(x.rows());
  for (std::size_t n = 0; n < x.rows(); ++n) p[n] = dot(x.row(n), w) >= 0.0 ? 1 : 0;
  return p;
}

ArrangementSet sample_arrangements(const Mat& x, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("sample_arrangements: need M >= 1");
  if (x.cols() == 0) throw DimensionError("sample_arrangements: zero-dimensional particles");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::map<Pattern, Vec> found;
  Vec u(x.cols());
  for (std::size_t j = 0; j < m; ++j) {
    for (double& c : u) c = normal(rng);
    found.try_emplace(activation_pattern(x, u), u);
  }
  return from_map(std::move(found), ArrangementSource::sampled);
}

ArrangementSet enumerate_arrangements_2d(const Mat& x) {
  if (x.cols() != 2) throw UnsupportedError("enumerate_arrangements_2d: needs d = 2, got d = " + std::to_string(x.cols()));
  const std::size_t n = x.rows();

  // Boundary rays: both unit normals of every nonzero row.
  struct Ray {
    double angle;
    Vec w;
  };
  std::vector<Ray> rays;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x(i, 0), b = x(i, 1);
    if (a == 0.0 && b == 0.0) continue;
    for (double s : {1.0, -1.0}) {
      Vec w{-s * b, s * a};
      double ang = std::atan2(w[1], w[0]);
      if (ang < 0.0) ang += 2.0 * std::numbers::pi;
      rays.push_back({ang, std::move(w)});
    }
  }

  std::map<Pattern, Vec> found;
  auto record = [&](Vec w) {
    const double wn = norm2(w);
    Pattern p(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = x(i, 0) * w[0] + x(i, 1) * w[1];
      const double scale = wn * std::hypot(x(i, 0), x(i, 1));
      p[i] = (u >= 0.0 || std::abs(u) <= 1e-12 * scale) ? 1 : 0;
    }
    found.try_emplace(std::move(p), std::move(w));
  };

  if (rays.empty()) {
    record(Vec{1.0, 0.0});
    return from_map(std::move(found), ArrangementSource::exact);
  }
  std::sort(rays.begin(), rays.end(), [](const Ray& l, const Ray& r) { return l.angle < r.angle; });
  for (std::size_t k = 0; k < rays.size(); ++k) {
    record(rays[k].w);
    const double a0 = rays[k].angle;
    double a1 = k + 1 < rays.size() ? rays[k + 1].angle : rays.front().angle + 2.0 * std::numbers::pi;
    if (a1 - a0 <= 0.0) continue;  // coincident rays
    const double mid = 0.5 * (a0 + a1);
    record(Vec{std::cos(mid), std::sin(mid)});
  }
  return from_map(std::move(found), ArrangementSource::exact);
}

double count_bound(std::size_t n, std::size_t r) {
  if (n < 2 || r < 1) throw std::invalid_argument("count_bound: need N >= 2 and r >= 1");
  const double rd = static_cast<double>(r);
  return std::ceil(2.0 * rd * std::pow(std::numbers::e * static_cast<double>(n - 1) / rd, rd));
}

std::size_t matrix_rank(const Mat& x, double rel_tol) {
  const Mat g = matmul(x.transpose(), x);
  const SymEig e = eig_sym(g);
  const double top = e.eigenvalues.empty() ? 0.0 : e.eigenvalues.back();
  if (top <= 0.0) return 0;
  std::size_t r = 0;
  for (double v : e.eigenvalues)
    if (v > rel_tol * top) ++r;
  return r;
}

}  // namespace cvxwgd
