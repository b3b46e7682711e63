#include "cvxwgd/conic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <tuple>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "cvxwgd/errors.hpp"
#include "cvxwgd/kernels.hpp"

namespace cvxwgd {

namespace {

using EVec = Eigen::VectorXd;

double inf_norm(const EVec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

EVec to_eigen(std::span<const double> v) { return Eigen::Map<const EVec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vec to_vec(const EVec& v) { return Vec(v.data(), v.data() + v.size()); }

std::vector<kernels::PsdBlock> psd_blocks(std::span<const Cone> cones) {
  std::vector<kernels::PsdBlock> blocks;
  std::size_t off = 0;
  for (const auto& c : cones) {
    if (c.kind == ConeKind::psd) blocks.push_back({off, c.order});
    off += c.length;
  }
  return blocks;
}

// Projection onto K with the PSD block list precomputed.
void project_in_place(EVec& v, std::span<const Cone> cones, std::span<const kernels::PsdBlock> blocks, bool parallel) {
  std::size_t off = 0;
  for (const auto& c : cones) {
    if (c.kind == ConeKind::zero) {
      v.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(c.length)).setZero();
    } else if (c.kind == ConeKind::nonneg) {
      for (std::size_t i = off; i < off + c.length; ++i) v[static_cast<Eigen::Index>(i)] = std::max(0.0, v[static_cast<Eigen::Index>(i)]);
    }
    off += c.length;
  }
  std::span<double> data(v.data(), static_cast<std::size_t>(v.size()));
  if (parallel) {
    kernels::omp::project_psd_blocks(data, blocks);
  } else {
    kernels::serial::project_psd_blocks(data, blocks);
  }
}

// Solves (P + sigma I + A^T diag(rho) A) x = rhs.
class LinearSystem {
 public:
  virtual ~LinearSystem() = default;
  virtual void factor(const EVec& rho) = 0;
  virtual EVec solve(const EVec& rhs_x, const EVec& rhs_y, const EVec& rho) = 0;
};

// Dense normal equations, Cholesky from densela.
class DenseNormalSystem final : public LinearSystem {
 public:
  DenseNormalSystem(const ConicProblem& pr, double sigma)
      : pdense_(dense_from_sparse(pr.p)), adense_(dense_from_sparse(pr.a)), sigma_(sigma) {}

  void factor(const EVec& rho) override {
    const std::size_t n = pdense_.rows();
    Mat m = pdense_;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += sigma_;
    for (std::size_t r = 0; r < adense_.rows(); ++r) {
      const double w = rho[static_cast<Eigen::Index>(r)];
      const auto row = adense_.row(r);
      for (std::size_t i = 0; i < n; ++i) {
        if (row[i] == 0.0) continue;
        const double wi = w * row[i];
        for (std::size_t j = 0; j < n; ++j) m(i, j) += wi * row[j];
      }
    }
    chol_ = std::make_unique<Cholesky>(m);
  }

  // rhs_x = sigma x - q, rhs_y = b - s + y / rho
  EVec solve(const EVec& rhs_x, const EVec& rhs_y, const EVec& rho) override {
    const std::size_t n = pdense_.rows();
    Vec r(rhs_x.data(), rhs_x.data() + n);
    for (std::size_t row = 0; row < adense_.rows(); ++row) {
      const double c = rho[static_cast<Eigen::Index>(row)] * rhs_y[static_cast<Eigen::Index>(row)];
      if (c == 0.0) continue;
      const auto ar = adense_.row(row);
      for (std::size_t i = 0; i < n; ++i) r[i] += ar[i] * c;
    }
    chol_->solve_in_place(r);
    return to_eigen(r);
  }

 private:
  Mat pdense_;
  Mat adense_;
  double sigma_;
  std::unique_ptr<Cholesky> chol_;
};

// Quasi-definite KKT system [P + sigma I, A^T; A, -diag(1/rho)], sparse LDL^T.
class SparseKktSystem final : public LinearSystem {
 public:
  SparseKktSystem(const ConicProblem& pr, double sigma) : n_(pr.num_vars()), m_(pr.num_rows()) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(pr.p.nonZeros() + pr.a.nonZeros()) + n_ + m_);
    for (int k = 0; k < pr.p.outerSize(); ++k)
      for (SparseMat::InnerIterator it(pr.p, k); it; ++it)
        if (it.row() >= it.col()) trip.emplace_back(it.row(), it.col(), it.value());
    for (std::size_t i = 0; i < n_; ++i) trip.emplace_back(i, i, sigma);
    for (int k = 0; k < pr.a.outerSize(); ++k)
      for (SparseMat::InnerIterator it(pr.a, k); it; ++it)
        trip.emplace_back(static_cast<Eigen::Index>(n_) + it.row(), it.col(), it.value());
    for (std::size_t r = 0; r < m_; ++r) trip.emplace_back(n_ + r, n_ + r, -1.0);
    kkt_.resize(static_cast<Eigen::Index>(n_ + m_), static_cast<Eigen::Index>(n_ + m_));
    kkt_.setFromTriplets(trip.begin(), trip.end());
    kkt_.makeCompressed();
    ldlt_.analyzePattern(kkt_);
  }

  void factor(const EVec& rho) override {
    for (std::size_t r = 0; r < m_; ++r) {
      const auto idx = static_cast<Eigen::Index>(n_ + r);
      kkt_.coeffRef(idx, idx) = -1.0 / rho[static_cast<Eigen::Index>(r)];
    }
    ldlt_.factorize(kkt_);
    if (ldlt_.info() != Eigen::Success) throw NumericError("conic solve: KKT factorization failed");
  }

  EVec solve(const EVec& rhs_x, const EVec& rhs_y, const EVec&) override {
    EVec rhs(static_cast<Eigen::Index>(n_ + m_));
    rhs.head(static_cast<Eigen::Index>(n_)) = rhs_x;
    rhs.tail(static_cast<Eigen::Index>(m_)) = rhs_y;
    const EVec sol = ldlt_.solve(rhs);
    return sol.head(static_cast<Eigen::Index>(n_));
  }

 private:
  std::size_t n_;
  std::size_t m_;
  SparseMat kkt_;
  Eigen::SimplicialLDLT<SparseMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::infeasible_suspect: return "infeasible_suspect";
  }
  return "unknown";
}

void ConicProblem::validate() const {
  const auto n = static_cast<Eigen::Index>(q.size());
  const auto m = static_cast<Eigen::Index>(b.size());
  if (p.rows() != n || p.cols() != n) throw DimensionError("ConicProblem: P must be n x n");
  if (a.rows() != m || a.cols() != n) throw DimensionError("ConicProblem: A must be m x n");
  std::size_t total = 0;
  for (const auto& c : cones) {
    if (c.kind == ConeKind::psd && c.length != svec_length(c.order)) {
      throw DimensionError("ConicProblem: psd cone length does not match its order");
    }
    total += c.length;
  }
  if (total != b.size()) throw DimensionError("ConicProblem: cone lengths do not sum to the row count");
}

double ConicProblem::objective(std::span<const double> z) const {
  const EVec zz = to_eigen(z);
  return 0.5 * zz.dot(p * zz) + to_eigen(q).dot(zz);
}

void SolverSettings::validate() const {
  if (!(rho > 0.0) || !(sigma > 0.0) || !(eps_abs > 0.0) || !(eps_rel > 0.0) || max_iters <= 0 ||
      infeas_check_every <= 0 || check_every <= 0 || adapt_every <= 0) {
    throw std::invalid_argument("SolverSettings: parameters must be positive");
  }
  if (!(alpha_relax > 0.0 && alpha_relax < 2.0)) throw std::invalid_argument("SolverSettings: alpha_relax must be in (0, 2)");
}

Vec project_cone(std::span<const double> v, std::span<const Cone> cones, bool parallel) {
  std::size_t total = 0;
  for (const auto& c : cones) total += c.length;
  if (total != v.size()) throw DimensionError("project_cone: vector length does not match cones");
  EVec e = to_eigen(v);
  const auto blocks = psd_blocks(cones);
  project_in_place(e, cones, blocks, parallel);
  return to_vec(e);
}

SolveResult solve(const ConicProblem& pr, const SolverSettings& st, const WarmStart* warm) {
  pr.validate();
  st.validate();
  const auto n = static_cast<Eigen::Index>(pr.num_vars());
  const auto m = static_cast<Eigen::Index>(pr.num_rows());
  const EVec q = to_eigen(pr.q);
  const EVec b = to_eigen(pr.b);
  const auto blocks = psd_blocks(pr.cones);

  // Equality rows get a stiffer penalty.
  EVec rho_scale = EVec::Ones(m);
  {
    std::size_t off = 0;
    for (const auto& c : pr.cones) {
      if (c.kind == ConeKind::zero) rho_scale.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(c.length)).setConstant(1e3);
      off += c.length;
    }
  }
  double rho = st.rho;
  EVec rho_vec = rho * rho_scale;

  std::unique_ptr<LinearSystem> sys;
  const bool dense = st.linear_solver == LinearSolverKind::dense ||
                     (st.linear_solver == LinearSolverKind::automatic && pr.num_vars() <= st.dense_max_vars);
  if (dense) {
    sys = std::make_unique<DenseNormalSystem>(pr, st.sigma);
  } else {
    sys = std::make_unique<SparseKktSystem>(pr, st.sigma);
  }
  sys->factor(rho_vec);

  EVec x = EVec::Zero(n), s = EVec::Zero(m), y = EVec::Zero(m);
  if (warm) {
    if (warm->z.size() == static_cast<std::size_t>(n)) x = to_eigen(warm->z);
    if (warm->slack.size() == static_cast<std::size_t>(m)) s = to_eigen(warm->slack);
    // stored dual is -y
    if (warm->dual.size() == static_cast<std::size_t>(m)) y = -to_eigen(warm->dual);
  }

  std::ofstream trace;
  if (!st.trace_path.empty()) {
    trace.open(st.trace_path);
    trace << "iter,primal_res,dual_res,objective\n" << std::setprecision(17);
  }

  SolveResult res;
  res.status = SolveStatus::max_iters;
  EVec y_prev = y;
  double window_rp = -1.0, window_obj = 0.0;
  double rp = 0.0, rd = 0.0;
  int k = 0;
  const double a = st.alpha_relax;

  auto residuals = [&](double& rp_out, double& rd_out, double& eps_p, double& eps_d) {
    const EVec ax = pr.a * x;
    const EVec px = pr.p * x;
    const EVec aty = pr.a.transpose() * y;
    rp_out = inf_norm(ax + s - b);
    rd_out = inf_norm(px + q - aty);
    eps_p = st.eps_abs + st.eps_rel * std::max({inf_norm(ax), inf_norm(s), inf_norm(b)});
    eps_d = st.eps_abs + st.eps_rel * std::max({inf_norm(px), inf_norm(aty), inf_norm(q)});
  };

  for (k = 1; k <= st.max_iters; ++k) {
    const EVec rhs_x = st.sigma * x - q;
    const EVec rhs_y = b - s + y.cwiseQuotient(rho_vec);
    const EVec xt = sys->solve(rhs_x, rhs_y, rho_vec);
    const EVec st_tilde = b - pr.a * xt;

    x = a * xt + (1.0 - a) * x;
    const EVec s_hat = a * st_tilde + (1.0 - a) * s;
    EVec s_new = s_hat + y.cwiseQuotient(rho_vec);
    project_in_place(s_new, pr.cones, blocks, st.parallel_projection);
    y_prev = y;
    y += rho_vec.cwiseProduct(s_hat - s_new);
    s = std::move(s_new);

    if (!x.allFinite() || !y.allFinite()) throw NumericError("conic solve: iterates diverged to non-finite values");

    const bool check = k % st.check_every == 0;
    const bool adapt = st.adaptive_rho && k % st.adapt_every == 0;
    const bool infeas = k % st.infeas_check_every == 0;
    if (!(check || adapt || infeas)) continue;

    double eps_p = 0.0, eps_d = 0.0;
    residuals(rp, rd, eps_p, eps_d);
    if (trace.is_open()) trace << k << ',' << rp << ',' << rd << ',' << pr.objective(std::span<const double>(x.data(), static_cast<std::size_t>(n))) << '\n';
    if (rp <= eps_p && rd <= eps_d) {
      res.status = SolveStatus::optimal;
      break;
    }

    if (infeas) {
      // Certificate: mu = -dy in K*, A^T mu ~ 0, b^T mu < 0.
      const EVec dmu = -(y - y_prev);
      const double dn = inf_norm(dmu);
      if (dn > 1e-12) {
        EVec proj = dmu;
        project_in_place(proj, pr.cones, blocks, false);
        std::size_t off = 0;
        for (const auto& c : pr.cones) {  // zero-cone duals are free
          if (c.kind == ConeKind::zero) proj.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(c.length)) = dmu.segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(c.length));
          off += c.length;
        }
        const bool in_cone = inf_norm(dmu - proj) <= st.eps_infeasible * dn;
        const bool null_at = inf_norm(pr.a.transpose() * dmu) <= st.eps_infeasible * dn;
        const bool neg_b = b.dot(dmu) <= -st.eps_infeasible * dn;
        if (in_cone && null_at && neg_b) {
          res.status = SolveStatus::infeasible_suspect;
          break;
        }
      }
      const double obj = pr.objective(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
      if (window_rp >= 0.0 && rp > 10.0 * window_rp && std::abs(obj) > 10.0 * std::abs(window_obj) + 1.0) {
        res.status = SolveStatus::infeasible_suspect;
        break;
      }
      window_rp = rp;
      window_obj = obj;
    }

    if (adapt) {
      const EVec ax = pr.a * x;
      const EVec px = pr.p * x;
      const EVec aty = pr.a.transpose() * y;
      const double np = rp / std::max({inf_norm(ax), inf_norm(s), inf_norm(b), 1e-12});
      const double nd = rd / std::max({inf_norm(px), inf_norm(aty), inf_norm(q), 1e-12});
      if (np > 0.0 && nd > 0.0) {
        const double rho_new = std::clamp(rho * std::sqrt(np / nd), 1e-6, 1e6);
        if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
          rho = rho_new;
          rho_vec = rho * rho_scale;
          sys->factor(rho_vec);
        }
      }
    }
  }

  double eps_p = 0.0, eps_d = 0.0;
  residuals(rp, rd, eps_p, eps_d);
  res.iterations = std::min(k, st.max_iters);
  res.z = to_vec(x);
  res.slack = to_vec(s);
  res.dual = to_vec(-y);
  res.primal_residual = rp;
  res.dual_residual = rd;
  res.objective = pr.objective(res.z);
  return res;
}

void dump_problem(std::ostream& os, const ConicProblem& pr) {
  pr.validate();
  os << std::setprecision(17);
  os << "conic " << pr.num_vars() << ' ' << pr.num_rows() << '\n';
  os << "cones " << pr.cones.size() << '\n';
  for (const auto& c : pr.cones) {
    switch (c.kind) {
      case ConeKind::zero: os << "zero " << c.length << '\n'; break;
      case ConeKind::nonneg: os << "nonneg " << c.length << '\n'; break;
      case ConeKind::psd: os << "psd " << c.order << '\n'; break;
    }
  }
  auto dump_sparse = [&](const char* name, const SparseMat& s) {
    os << name << ' ' << s.nonZeros() << '\n';
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> t;
    for (int k = 0; k < s.outerSize(); ++k)
      for (SparseMat::InnerIterator it(s, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    std::sort(t.begin(), t.end());
    for (const auto& [r, c, v] : t) os << r << ' ' << c << ' ' << v << '\n';
  };
  dump_sparse("P", pr.p);
  dump_sparse("A", pr.a);
  auto dump_dense = [&](const char* name, const Vec& v) {
    std::size_t nz = 0;
    for (double x : v) nz += x != 0.0 ? 1 : 0;
    os << name << ' ' << nz << '\n';
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0.0) os << i << ' ' << v[i] << '\n';
  };
  dump_dense("q", pr.q);
  dump_dense("b", pr.b);
}

SparseMat sparse_from_dense(const Mat& m) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) t.emplace_back(i, j, m(i, j));
  SparseMat s(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

Mat dense_from_sparse(const SparseMat& s) {
  Mat m(static_cast<std::size_t>(s.rows()), static_cast<std::size_t>(s.cols()));
  for (int k = 0; k < s.outerSize(); ++k)
    for (SparseMat::InnerIterator it(s, k); it; ++it)
      m(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col())) += it.value();
  return m;
}

}  // namespace cvxwgd
