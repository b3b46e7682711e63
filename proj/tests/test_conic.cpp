#include <cmath>
#include <random>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "cvxwgd/conic.hpp"
#include "cvxwgd/errors.hpp"

using namespace cvxwgd;

namespace {

ConicProblem make(const Mat& p, Vec q, const Mat& a, Vec b, std::vector<Cone> cones) {
  ConicProblem pr;
  pr.p = sparse_from_dense(p);
  pr.q = std::move(q);
  pr.a = sparse_from_dense(a);
  pr.b = std::move(b);
  pr.cones = std::move(cones);
  return pr;
}

// Feasible, bounded random program over zero, nonneg and PSD cones.
ConicProblem random_program(std::mt19937_64& rng) {
  const std::size_t n = 6;
  std::vector<Cone> cones{Cone::zero(1), Cone::nonneg(3), Cone::psd(2), Cone::psd(3)};
  std::size_t m = 0;
  for (const auto& c : cones) m += c.length;
  const Mat g = testutil::random_mat(n, n, rng);
  const Mat p = matmul(g.transpose(), g) + Mat::identity(n) * 0.1;
  const Mat a = testutil::random_mat(m, n, rng);
  const Vec z0 = testutil::random_vec(n, rng);
  Vec s0 = project_cone(testutil::random_vec(m, rng), cones);
  const Vec az = matvec(a, z0);
  Vec b(m);
  for (std::size_t i = 0; i < m; ++i) b[i] = az[i] + s0[i];
  return make(p, testutil::random_vec(n, rng), a, b, cones);
}

double min_eig_svec(std::span<const double> v) { return eig_sym(smat(v)).eigenvalues.front(); }

}  // namespace

TEST_CASE("project_cone examples") {
  const Vec psd = project_cone(svec(Mat{{1, 0}, {0, -1}}), std::vector<Cone>{Cone::psd(2)});
  CHECK(max_abs(smat(psd) - Mat{{1, 0}, {0, 0}}) < 1e-14);
  const Vec nn = project_cone(Vec{-1, 2}, std::vector<Cone>{Cone::nonneg(2)});
  CHECK(nn == Vec{0, 2});
  const Vec z = project_cone(Vec{3, -4}, std::vector<Cone>{Cone::zero(2)});
  CHECK(z == Vec{0, 0});
  CHECK_THROWS_AS(project_cone(Vec{1, 2, 3}, std::vector<Cone>{Cone::nonneg(2)}), DimensionError);
}

TEST_CASE("psd projection is the nearest PSD matrix") {
  std::mt19937_64 rng(61);
  const std::vector<Cone> cones{Cone::psd(5)};
  for (int t = 0; t < 3; ++t) {
    const Mat a = testutil::random_sym(5, rng);
    const Vec pv = project_cone(svec(a), cones);
    const Mat pa = smat(pv);
    CHECK(eig_sym(pa).eigenvalues.front() > -1e-12);
    CHECK(max_abs(smat(project_cone(pv, cones)) - pa) < 1e-12);
    const double best = frobenius_norm(pa - a);
    for (int c = 0; c < 10000; ++c) {
      const Mat g = testutil::random_mat(5, 5, rng);
      const Mat cand = matmul(g, g.transpose()) * (1.0 / 5.0);
      CHECK_MESSAGE(frobenius_norm(cand - a) >= best - 1e-12, "candidate closer than projection");
    }
  }
}

TEST_CASE("unconstrained quadratic") {
  const ConicProblem pr = make(Mat{{1}}, Vec{1}, Mat(0, 1), Vec{}, {});
  const SolveResult r = solve(pr);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(std::abs(r.z[0] + 1.0) < 1e-6);
}

TEST_CASE("2x2 LMI with linear objective") {
  const ConicProblem pr = make(Mat(1, 1), Vec{1}, Mat{{-1}, {0}, {-1}}, Vec{0, std::sqrt(2.0), 0}, {Cone::psd(2)});
  const SolveResult r = solve(pr);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(std::abs(r.z[0] - 1.0) < 1e-6);
}

TEST_CASE("projection onto a half-line") {
  const ConicProblem pr = make(Mat{{1}}, Vec{0}, Mat{{-1}}, Vec{-1}, {Cone::nonneg(1)});
  const SolveResult r = solve(pr);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(std::abs(r.z[0] - 1.0) < 1e-6);
}

TEST_CASE("random programs satisfy KKT conditions") {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 20; ++t) {
    const ConicProblem pr = random_program(rng);
    const SolveResult r = solve(pr);
    REQUIRE(r.status == SolveStatus::optimal);
    const Vec az = matvec(dense_from_sparse(pr.a), r.z);
    Vec slack(pr.b.size());
    for (std::size_t i = 0; i < slack.size(); ++i) slack[i] = pr.b[i] - az[i];
    CHECK(std::abs(slack[0]) < 1e-6);
    for (std::size_t i = 1; i < 4; ++i) CHECK(slack[i] > -1e-6);
    CHECK(min_eig_svec(std::span<const double>(slack).subspan(4, 3)) > -1e-6);
    CHECK(min_eig_svec(std::span<const double>(slack).subspan(7, 6)) > -1e-6);
    // dual in K*
    for (std::size_t i = 1; i < 4; ++i) CHECK(r.dual[i] > -1e-6);
    CHECK(min_eig_svec(std::span<const double>(r.dual).subspan(4, 3)) > -1e-6);
    CHECK(min_eig_svec(std::span<const double>(r.dual).subspan(7, 6)) > -1e-6);
    const Vec pz = matvec(dense_from_sparse(pr.p), r.z);
    const Vec atd = matvec(dense_from_sparse(pr.a).transpose(), r.dual);
    double stat = 0.0, qn = 0.0;
    for (std::size_t i = 0; i < pz.size(); ++i) {
      stat = std::max(stat, std::abs(pz[i] + pr.q[i] + atd[i]));
      qn = std::max(qn, std::abs(pr.q[i]));
    }
    CHECK(stat < 1e-5 * (1 + qn));
    const double scale = 1.0 + norm2(slack) * norm2(r.dual);
    CHECK(std::abs(dot(slack, r.dual)) < 1e-5 * scale);
  }
}

TEST_CASE("dense and sparse linear solvers agree") {
  std::mt19937_64 rng(63);
  const ConicProblem pr = random_program(rng);
  SolverSettings d, s;
  d.linear_solver = LinearSolverKind::dense;
  s.linear_solver = LinearSolverKind::sparse;
  const SolveResult a = solve(pr, d);
  const SolveResult b = solve(pr, s);
  REQUIRE(a.status == SolveStatus::optimal);
  REQUIRE(b.status == SolveStatus::optimal);
  for (std::size_t i = 0; i < a.z.size(); ++i) CHECK(std::abs(a.z[i] - b.z[i]) < 1e-5);
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(64);
  const ConicProblem pr = random_program(rng);
  const SolveResult a = solve(pr);
  const SolveResult b = solve(pr);
  CHECK(a.iterations == b.iterations);
  CHECK(a.z == b.z);
  CHECK(a.dual == b.dual);
}

TEST_CASE("warm start from a solution converges immediately") {
  std::mt19937_64 rng(65);
  const ConicProblem pr = random_program(rng);
  const SolveResult a = solve(pr);
  const WarmStart w{a.z, a.slack, a.dual};
  const SolveResult b = solve(pr, {}, &w);
  CHECK(b.status == SolveStatus::optimal);
  CHECK(b.iterations <= a.iterations);
}

TEST_CASE("infeasible program is flagged") {
  // z >= 1 and z <= 0
  const ConicProblem pr = make(Mat(1, 1), Vec{1}, Mat{{-1}, {1}}, Vec{-1, 0}, {Cone::nonneg(2)});
  const SolveResult r = solve(pr);
  CHECK(r.status == SolveStatus::infeasible_suspect);
}

TEST_CASE("problem validation") {
  ConicProblem pr = make(Mat{{1}}, Vec{1}, Mat{{1}}, Vec{1}, {Cone::nonneg(2)});
  CHECK_THROWS_AS(pr.validate(), DimensionError);
  SolverSettings bad;
  bad.alpha_relax = 2.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("iteration trace and dump") {
  const ConicProblem pr = make(Mat{{1}}, Vec{0}, Mat{{-1}}, Vec{-1}, {Cone::nonneg(1)});
  std::ostringstream os;
  dump_problem(os, pr);
  CHECK(os.str() == "conic 1 1\ncones 1\nnonneg 1\nP 1\n0 0 1\nA 1\n0 0 -1\nq 0\nb 1\n0 -1\n");
  SolverSettings st;
  st.trace_path = "conic_trace_test.csv";
  (void)solve(pr, st);
  std::ifstream f(st.trace_path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "iter,primal_res,dual_res,objective");
}
