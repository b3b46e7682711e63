#include "cvxwgd/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SparseCore>

#include "cvxwgd/errors.hpp"

namespace cvxwgd {

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr double kSqrt2 = 1.41421356237309504880;

void check_pattern(const Mat& x, const Pattern& d) {
  if (d.size() != x.rows()) {
    throw DimensionError("pattern length " + std::to_string(d.size()) + " does not match " +
                         std::to_string(x.rows()) + " particles");
  }
}

void check_xy(const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("particles and scores differ in shape");
  }
  if (x.rows() == 0 || x.cols() == 0) throw DimensionError("empty particle matrix");
}

double svec_scale(std::size_t a, std::size_t b) { return a == b ? 1.0 : kSqrt2; }

// Appends the rows of one LMI
//   sign (A_j(L) + B_j) + sum_n r_n H_n + bt E  (- t I)
// in the form b - A z. Columns < 0 mean "not a variable".
struct LmiColumns {
  bool lambda = true;        // L occupies columns [0, N d)
  std::size_t r_offset = 0;  // first of N + 1 r columns
  long beta = -1;            // bt column, or fixed value via constant
  long t = -1;               // -t I column
};

void append_lmi(std::vector<Triplet>& trip, Vec& b, std::size_t row0, const Mat& x, const ConstraintBlock& blk,
                double sign, const LmiColumns& cols, const Mat& constant) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = d + 1;
  Vec c = svec(constant);
  for (std::size_t i = 0; i < c.size(); ++i) b[row0 + i] = c[i];

  if (cols.lambda) {
    // dA_{ab}/dL_{mc} = -D_m (delta_{ac} X_{mb} + delta_{bc} X_{ma})
    for (std::size_t m = 0; m < n; ++m) {
      if (!blk.d[m]) continue;
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t bb = a; bb < d; ++bb) {
          const std::size_t row = row0 + svec_index(k, a, bb);
          const double f = svec_scale(a, bb);
          if (a == bb) {
            trip.emplace_back(row, m * d + a, sign * f * 2.0 * x(m, a));
          } else {
            trip.emplace_back(row, m * d + a, sign * f * x(m, bb));
            trip.emplace_back(row, m * d + bb, sign * f * x(m, a));
          }
        }
      }
    }
  }
  // H_0
  for (std::size_t a = 0; a < d; ++a) trip.emplace_back(row0 + svec_index(k, a, a), cols.r_offset, -1.0);
  trip.emplace_back(row0 + svec_index(k, d, d), cols.r_offset, 1.0);
  // H_n, n >= 1
  for (std::size_t m = 0; m < n; ++m) {
    const double cm = blk.d[m] ? -1.0 : 1.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double v = cm * x(m, a);
      if (v != 0.0) trip.emplace_back(row0 + svec_index(k, a, d), cols.r_offset + 1 + m, -kSqrt2 * v);
    }
  }
  if (cols.beta >= 0) trip.emplace_back(row0 + svec_index(k, d, d), cols.beta, -1.0);
  if (cols.t >= 0) {
    for (std::size_t a = 0; a < k; ++a) trip.emplace_back(row0 + svec_index(k, a, a), cols.t, 1.0);
  }
}

ConicProblem encode_common(const Mat& x, const std::vector<ConstraintBlock>& blocks, double beta_tilde,
                           bool beta_variable) {
  if (blocks.empty()) throw DimensionError("no constraint blocks");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = d + 1;
  const DualLayout lay{n, d, blocks.size(), beta_variable};
  const std::size_t nv = lay.num_vars();
  const std::size_t n_r = 2 * blocks.size() * (n + 1);
  const std::size_t blen = svec_length(k);
  const std::size_t m_rows = n_r + 2 * blocks.size() * blen;

  ConicProblem prob;
  prob.q.assign(nv, 0.0);
  prob.b.assign(m_rows, 0.0);
  prob.p.resize(nv, nv);
  prob.a.resize(m_rows, nv);

  std::vector<Triplet> trip;
  trip.reserve(n_r + blocks.size() * 2 * (n * d * d + n * d + k + 2));
  for (std::size_t i = 0; i < n_r; ++i) trip.emplace_back(i, lay.lambda_size() + i, -1.0);

  prob.cones.push_back(Cone::nonneg(n_r));
  std::size_t row = n_r;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& blk = blocks[j];
    check_pattern(x, blk.d);
    for (int s = 0; s < 2; ++s) {
      const double sign = s == 0 ? 1.0 : -1.0;
      LmiColumns cols;
      cols.r_offset = s == 0 ? lay.r_minus(j) : lay.r_plus(j);
      Mat constant = blk.b_tilde * sign;
      if (beta_variable) {
        cols.beta = static_cast<long>(lay.beta_index());
      } else {
        constant(d, d) += beta_tilde;
      }
      append_lmi(trip, prob.b, row, x, blk, sign, cols, constant);
      prob.cones.push_back(Cone::psd(k));
      row += blen;
    }
  }
  prob.a.setFromTriplets(trip.begin(), trip.end());
  return prob;
}

// Per-block LMI for a fixed L: returns the encoded problem over (r_0..r_N, extra).
// mode 0: max t with the LMI >= t I at the given bt; mode 1: min bt.
ConicProblem encode_fixed_lambda_block(const Mat& x, const ConstraintBlock& blk, const Mat& a_tilde, double sign,
                                       double beta_tilde, int mode) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = d + 1;
  const std::size_t nv = n + 2;
  const std::size_t blen = svec_length(k);

  ConicProblem prob;
  prob.q.assign(nv, 0.0);
  prob.b.assign(n + 1 + blen, 0.0);
  prob.p.resize(nv, nv);
  prob.a.resize(n + 1 + blen, nv);
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i <= n; ++i) trip.emplace_back(i, i, -1.0);
  prob.cones.push_back(Cone::nonneg(n + 1));

  Mat constant = (a_tilde + blk.b_tilde) * sign;
  LmiColumns cols;
  cols.lambda = false;
  cols.r_offset = 0;
  if (mode == 0) {
    constant(d, d) += beta_tilde;
    cols.t = static_cast<long>(n + 1);
    prob.q[n + 1] = -1.0;
  } else {
    cols.beta = static_cast<long>(n + 1);
    prob.q[n + 1] = 1.0;
  }
  append_lmi(trip, prob.b, n + 1, x, blk, sign, cols, constant);
  prob.cones.push_back(Cone::psd(k));
  prob.a.setFromTriplets(trip.begin(), trip.end());
  return prob;
}

Mat outer_lift(std::span<const double> w) {
  const std::size_t d = w.size();
  Mat s(d + 1, d + 1);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) s(a, b) = w[a] * w[b];
    s(a, d) = w[a];
    s(d, a) = w[a];
  }
  s(d, d) = 1.0;
  return s;
}

}  // namespace

Mat apply_Aj(const Mat& lambda, const Mat& x, const Pattern& d) {
  check_xy(x, lambda);
  check_pattern(x, d);
  const std::size_t dim = x.cols();
  Mat out(dim, dim);
  for (std::size_t m = 0; m < x.rows(); ++m) {
    if (!d[m]) continue;
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) out(a, b) -= lambda(m, a) * x(m, b) + x(m, a) * lambda(m, b);
    }
  }
  return out;
}

Mat apply_Aj_tilde(const Mat& lambda, const Mat& x, const Pattern& d) {
  const Mat a = apply_Aj(lambda, x, d);
  const std::size_t dim = a.rows();
  Mat out(dim + 1, dim + 1);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) out(i, j) = a(i, j);
  }
  return out;
}

Mat adjoint_Aj(const Mat& s, const Mat& x, const Pattern& d) {
  check_pattern(x, d);
  const std::size_t dim = x.cols();
  if (s.rows() != dim + 1 || s.cols() != dim + 1) {
    throw DimensionError("adjoint expects a " + std::to_string(dim + 1) + " x " + std::to_string(dim + 1) +
                         " matrix");
  }
  Mat out(x.rows(), dim);
  for (std::size_t m = 0; m < x.rows(); ++m) {
    if (!d[m]) continue;
    for (std::size_t c = 0; c < dim; ++c) {
      double acc = 0.0;
      for (std::size_t a = 0; a < dim; ++a) acc += x(m, a) * 0.5 * (s(a, c) + s(c, a));
      out(m, c) = -2.0 * acc;
    }
  }
  return out;
}

std::vector<ConstraintBlock> build_blocks(const Mat& x, const ArrangementSet& arrangements) {
  if (x.rows() == 0 || x.cols() == 0) throw DimensionError("empty particle matrix");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = d + 1;
  Mat e(k, k);
  e(d, d) = 1.0;
  Mat h0 = Mat::identity(k);
  h0(d, d) = -1.0;

  std::vector<ConstraintBlock> blocks;
  blocks.reserve(arrangements.size());
  for (const auto& pat : arrangements.patterns) {
    check_pattern(x, pat);
    ConstraintBlock blk;
    blk.d = pat;
    double tr = 0.0;
    for (auto v : pat) tr += v;
    blk.b_tilde = Mat(k, k);
    for (std::size_t a = 0; a < d; ++a) blk.b_tilde(a, a) = 2.0 * tr;
    blk.h.reserve(n + 1);
    blk.h.push_back(h0);
    for (std::size_t m = 0; m < n; ++m) {
      Mat h(k, k);
      const double cm = pat[m] ? -1.0 : 1.0;
      for (std::size_t a = 0; a < d; ++a) {
        h(a, d) = cm * x(m, a);
        h(d, a) = cm * x(m, a);
      }
      blk.h.push_back(std::move(h));
    }
    blk.e = e;
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

ConicProblem encode_relaxed_dual(const RelaxedDualProblem& problem) {
  check_xy(problem.x, problem.y);
  if (!(problem.beta_tilde >= 0.0) || !std::isfinite(problem.beta_tilde)) {
    throw DimensionError("beta_tilde must be finite and nonnegative");
  }
  ConicProblem prob = encode_common(problem.x, problem.blocks, problem.beta_tilde, false);
  const std::size_t nl = problem.x.rows() * problem.x.cols();
  std::vector<Triplet> pt;
  pt.reserve(nl);
  for (std::size_t i = 0; i < nl; ++i) {
    pt.emplace_back(i, i, 1.0);
    prob.q[i] = problem.y.data()[i];
  }
  prob.p.setFromTriplets(pt.begin(), pt.end());
  return prob;
}

RelaxedDualSolution solve_relaxed_dual(const RelaxedDualProblem& problem, const SolverSettings& settings,
                                       const WarmStart* warm) {
  const ConicProblem prob = encode_relaxed_dual(problem);
  RelaxedDualSolution sol;
  sol.raw = solve(prob, settings, warm);
  sol.status = sol.raw.status;
  const std::size_t n = problem.x.rows();
  const std::size_t d = problem.x.cols();
  sol.lambda = Mat(n, d, Vec(sol.raw.z.begin(), sol.raw.z.begin() + static_cast<long>(n * d)));
  const Mat diff = sol.lambda + problem.y;
  const double nrm = frobenius_norm(diff);
  sol.value = -0.5 * nrm * nrm;
  return sol;
}

ConicProblem encode_beta_min(const Mat& x, const std::vector<ConstraintBlock>& blocks) {
  if (x.rows() == 0 || x.cols() == 0) throw DimensionError("empty particle matrix");
  ConicProblem prob = encode_common(x, blocks, 0.0, true);
  const DualLayout lay{x.rows(), x.cols(), blocks.size(), true};
  prob.q[lay.beta_index()] = 1.0;
  return prob;
}

BetaMinResult solve_beta_min(const Mat& x, const std::vector<ConstraintBlock>& blocks,
                             const SolverSettings& settings, const WarmStart* warm) {
  const ConicProblem prob = encode_beta_min(x, blocks);
  const DualLayout lay{x.rows(), x.cols(), blocks.size(), true};
  BetaMinResult res;
  res.raw = solve(prob, settings, warm);
  res.status = res.raw.status;
  res.beta_tilde_min = res.raw.z[lay.beta_index()];
  res.lambda = Mat(x.rows(), x.cols(),
                   Vec(res.raw.z.begin(), res.raw.z.begin() + static_cast<long>(lay.lambda_size())));
  return res;
}

LambdaFeasibility check_lambda_feasible(const Mat& lambda, const Mat& x, const std::vector<ConstraintBlock>& blocks,
                                        double beta_tilde, const SolverSettings& settings, double tol) {
  check_xy(x, lambda);
  if (blocks.empty()) throw DimensionError("no constraint blocks");
  LambdaFeasibility out{true, std::numeric_limits<double>::infinity(), 0};
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const Mat at = apply_Aj_tilde(lambda, x, blocks[j].d);
    for (double sign : {1.0, -1.0}) {
      const ConicProblem prob = encode_fixed_lambda_block(x, blocks[j], at, sign, beta_tilde, 0);
      const SolveResult r = solve(prob, settings);
      const double t = r.z[x.rows() + 1];
      if (t < out.worst_slack) {
        out.worst_slack = t;
        out.worst_block = j;
      }
    }
  }
  out.feasible = out.worst_slack >= -tol;
  return out;
}

double min_feasible_beta(const Mat& lambda, const Mat& x, const std::vector<ConstraintBlock>& blocks,
                         const SolverSettings& settings) {
  check_xy(x, lambda);
  if (blocks.empty()) throw DimensionError("no constraint blocks");
  double best = 0.0;
  for (const auto& blk : blocks) {
    const Mat at = apply_Aj_tilde(lambda, x, blk.d);
    for (double sign : {1.0, -1.0}) {
      const ConicProblem prob = encode_fixed_lambda_block(x, blk, at, sign, 0.0, 1);
      const SolveResult r = solve(prob, settings);
      best = std::max(best, r.z[x.rows() + 1]);
    }
  }
  return best;
}

double shutdown_threshold(const Mat& y, const Mat& x, const std::vector<ConstraintBlock>& blocks,
                          const SolverSettings& settings) {
  return min_feasible_beta(y * -1.0, x, blocks, settings);
}

double bidual_objective(const BidualCertificate& cert, const std::vector<ConstraintBlock>& blocks, const Mat& y,
                        double beta_tilde) {
  check_xy(cert.z, y);
  if (cert.s_plus.size() != blocks.size() || cert.s_minus.size() != blocks.size()) {
    throw DimensionError("certificate has " + std::to_string(cert.s_plus.size()) + " blocks, expected " +
                         std::to_string(blocks.size()));
  }
  const double zy = frobenius_norm(cert.z + y);
  const double yy = frobenius_norm(y);
  double val = 0.5 * zy * zy - 0.5 * yy * yy;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    val += frobenius_dot(blocks[j].b_tilde, cert.s_plus[j] - cert.s_minus[j]);
    val += beta_tilde * frobenius_dot(blocks[j].e, cert.s_plus[j] + cert.s_minus[j]);
  }
  return val;
}

BidualReport check_bidual_feasible(const BidualCertificate& cert, const std::vector<ConstraintBlock>& blocks,
                                   const Mat& x) {
  if (cert.s_plus.size() != blocks.size() || cert.s_minus.size() != blocks.size()) {
    throw DimensionError("certificate block count does not match");
  }
  Mat zsum(x.rows(), x.cols());
  BidualReport rep{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    zsum += adjoint_Aj(cert.s_minus[j] - cert.s_plus[j], x, blocks[j].d);
    for (const Mat* s : {&cert.s_plus[j], &cert.s_minus[j]}) {
      for (const auto& h : blocks[j].h) rep.max_trace_violation = std::max(rep.max_trace_violation, frobenius_dot(*s, h));
      rep.min_eigenvalue = std::min(rep.min_eigenvalue, eig_sym(*s).eigenvalues.front());
    }
  }
  rep.z_residual = max_abs(cert.z - zsum);
  return rep;
}

Mat network_gradients(const Mat& w, const Vec& alpha, const Mat& x) {
  if (w.rows() != x.cols()) throw DimensionError("weight rows must equal the particle dimension");
  if (w.cols() != alpha.size()) throw DimensionError("weight columns must equal the number of outer weights");
  Mat z(x.rows(), x.cols());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    for (std::size_t i = 0; i < w.cols(); ++i) {
      double pre = 0.0;
      for (std::size_t a = 0; a < x.cols(); ++a) pre += x(n, a) * w(a, i);
      const double g = alpha[i] * srelu_d1(pre);
      if (g == 0.0) continue;
      for (std::size_t a = 0; a < x.cols(); ++a) z(n, a) += g * w(a, i);
    }
  }
  return z;
}

BidualCertificate lift_primal(const Mat& w, const Vec& alpha, const Mat& x, const ArrangementSet& arrangements) {
  if (w.rows() != x.cols()) throw DimensionError("weight rows must equal the particle dimension");
  if (w.cols() != alpha.size()) throw DimensionError("weight columns must equal the number of outer weights");
  const std::size_t d = x.cols();
  const std::size_t p = arrangements.size();
  BidualCertificate cert;
  cert.s_plus.assign(p, Mat(d + 1, d + 1));
  cert.s_minus.assign(p, Mat(d + 1, d + 1));
  for (std::size_t i = 0; i < w.cols(); ++i) {
    Vec wi(d);
    for (std::size_t a = 0; a < d; ++a) wi[a] = w(a, i);
    if (norm2(wi) > 1.0 + 1e-12) {
      throw PreconditionError("neuron " + std::to_string(i) + " has norm " + std::to_string(norm2(wi)) + " > 1");
    }
    const Pattern pat = activation_pattern(x, wi);
    const auto it = std::lower_bound(arrangements.patterns.begin(), arrangements.patterns.end(), pat);
    if (it == arrangements.patterns.end() || *it != pat) {
      throw CoverageError("activation pattern of neuron " + std::to_string(i) + " is not in the arrangement set");
    }
    const std::size_t j = static_cast<std::size_t>(it - arrangements.patterns.begin());
    if (alpha[i] >= 0.0) {
      cert.s_plus[j] += outer_lift(wi) * alpha[i];
    } else {
      cert.s_minus[j] += outer_lift(wi) * (-alpha[i]);
    }
  }
  cert.z = network_gradients(w, alpha, x);
  return cert;
}

}  // namespace cvxwgd
