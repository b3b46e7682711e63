#include "cvxwgd/dynamics.hpp"

#include <cmath>
#include <random>
#include <string>

#include "cvxwgd/errors.hpp"
#include "cvxwgd/metrics.hpp"
#include "cvxwgd/sdp.hpp"
#include "cvxwgd/seeding.hpp"

namespace cvxwgd {

namespace {

double mean_row_norm(const Mat& m) {
  if (m.rows() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += norm2(m.row(i));
  return s / static_cast<double>(m.rows());
}

void check_state(const CnwdState& s) {
  if (!(s.beta_tilde > 0.0) || !std::isfinite(s.beta_tilde)) throw PreconditionError("beta_tilde must be positive");
  if (!(s.step_size >= 0.0)) throw PreconditionError("step size must be nonnegative");
  if (!(s.gamma1 > 0.0 && s.gamma1 < 1.0) || !(s.gamma2 > 0.0 && s.gamma2 < 1.0)) {
    throw PreconditionError("gamma1 and gamma2 must lie in (0, 1)");
  }
  if (!s.ensemble.x.all_finite()) throw NumericError("particles contain non-finite entries");
}

}  // namespace

ArrangementSet make_arrangements(const Mat& x, const ArrangementSettings& settings, std::uint64_t seed) {
  switch (settings.policy) {
    case ArrangementPolicy::exact2d:
      return enumerate_arrangements_2d(x);
    case ArrangementPolicy::sampled:
      return sample_arrangements(x, settings.samples, seed);
    case ArrangementPolicy::automatic:
      break;
  }
  if (x.cols() == 2) return enumerate_arrangements_2d(x);
  return sample_arrangements(x, settings.samples, seed);
}

Mat init_ensemble(std::size_t n, const Vec& mean, double scale, std::uint64_t seed) {
  if (mean.empty()) throw DimensionError("init_ensemble: empty mean");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Mat x(n, mean.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < mean.size(); ++c) x(i, c) = mean[c] + scale * gauss(rng);
  }
  return x;
}

IterationRecord cnwd_step(CnwdState& state, const TargetModel& model) {
  check_state(state);
  Mat& x = state.ensemble.x;
  const std::size_t iter = state.ensemble.iteration;
  IterationRecord rec;
  rec.iteration = iter + 1;
  rec.beta_tilde = state.beta_tilde;

  const Mat y = score_matrix(model, x);
  const ArrangementSet arr = make_arrangements(x, state.arrangements, derive_seed(state.seed, "arrangements", iter));
  const auto blocks = build_blocks(x, arr);
  rec.num_patterns = blocks.size();

  bool feasible = true;
  if (state.beta_precheck) {
    const BetaMinResult bm = solve_beta_min(x, blocks, state.solver);
    rec.beta_tilde_min = bm.beta_tilde_min;
    if (state.beta_tilde < bm.beta_tilde_min) {
      feasible = false;
      rec.solver_status = "below_beta_min";
    }
  }
  if (feasible) {
    const RelaxedDualSolution sol = solve_relaxed_dual({x, y, state.beta_tilde, blocks}, state.solver);
    rec.solver_status = to_string(sol.status);
    if (!sol.lambda.all_finite()) throw NumericError("relaxed dual returned non-finite multipliers");
    if (sol.status == SolveStatus::infeasible_suspect) {
      feasible = false;
    } else {
      const Mat dir = sol.lambda + y;
      rec.update_norm = mean_row_norm(dir);
      x += dir * state.step_size;
    }
  }
  rec.feasible = feasible;
  state.beta_tilde = feasible ? state.beta_tilde * state.gamma1 : state.beta_tilde / state.gamma2;
  state.ensemble.iteration = iter + 1;
  return rec;
}

NetworkParams wgd_nn_step(ParticleEnsemble& ensemble, const TargetModel& model, const NetworkParams& theta_prev,
                          double beta, double lr, int sub_iters, double step_size, double* update_norm) {
  Mat& x = ensemble.x;
  const Mat y = score_matrix(model, x);
  NetworkParams theta = train_adam(theta_prev, x, y, beta, lr, sub_iters);
  for (double a : theta.alpha) {
    if (!std::isfinite(a)) throw NumericError("network training produced non-finite weights");
  }
  if (!theta.w.all_finite()) throw NumericError("network training produced non-finite weights");
  Mat g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) g.set_row(i, grad_phi(theta, x.row(i)));
  if (update_norm != nullptr) *update_norm = mean_row_norm(g);
  x -= g * step_size;
  ensemble.iteration += 1;
  return theta;
}

std::string to_string(Method m) { return m == Method::cvxnn ? "cvxnn" : "nn"; }

Trajectory run(const Mat& x0, const TargetModel& model, const RunSettings& settings, const Mat* reference,
               const IterationObserver& observer) {
  if (x0.cols() != model.dim()) throw DimensionError("initial particles do not match the target dimension");
  Trajectory traj;
  traj.initial = x0;
  if (reference != nullptr) traj.initial_mmd = mmd2(x0, *reference);

  const std::size_t n = x0.rows();
  std::size_t quiet = 0;
  auto finish = [&](IterationRecord& rec, const Mat& x) {
    if (reference != nullptr) rec.mmd = mmd2(x, *reference);
    traj.records.push_back(rec);
    if (observer) observer(rec, x);
    quiet = rec.update_norm < 1e-8 ? quiet + 1 : 0;
    return settings.early_stop && quiet >= 5;
  };

  if (settings.method == Method::cvxnn) {
    CnwdState state;
    state.ensemble.x = x0;
    state.beta_tilde = beta_tilde_from_beta(n, settings.beta);
    state.gamma1 = settings.gamma1;
    state.gamma2 = settings.gamma2;
    state.step_size = settings.step_size;
    state.arrangements = settings.arrangements;
    state.seed = settings.seed;
    state.solver = settings.solver;
    state.beta_precheck = settings.beta_precheck;
    for (std::size_t l = 0; l < settings.iterations; ++l) {
      IterationRecord rec;
      try {
        rec = cnwd_step(state, model);
      } catch (const std::exception& e) {
        throw StepError(l + 1, e.what());
      }
      if (finish(rec, state.ensemble.x)) break;
    }
    traj.final = state.ensemble.x;
  } else {
    ParticleEnsemble ens{x0, 0};
    NetworkParams theta = init_network(x0.cols(), settings.neurons, derive_seed(settings.seed, "nn-init"));
    double beta = settings.beta;
    for (std::size_t l = 0; l < settings.iterations; ++l) {
      IterationRecord rec;
      rec.iteration = l + 1;
      rec.beta_tilde = beta_tilde_from_beta(n, beta);
      rec.feasible = true;
      rec.solver_status = "adam";
      try {
        if (settings.nn_cold_start) {
          theta = init_network(x0.cols(), settings.neurons, derive_seed(settings.seed, "nn-init", l));
        }
        theta = wgd_nn_step(ens, model, theta, beta, settings.lr, settings.sub_iters, settings.step_size,
                            &rec.update_norm);
      } catch (const std::exception& e) {
        throw StepError(l + 1, e.what());
      }
      beta *= settings.beta_decay;
      if (finish(rec, ens.x)) break;
    }
    traj.final = ens.x;
  }
  return traj;
}

}  // namespace cvxwgd
