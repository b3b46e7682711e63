#pragma once

// Outer particle loops: the convex-network Wasserstein descent (relaxed dual
// SDP per iteration, adaptive bt) and the baseline that trains the squared-ReLU
// network directly with Adam.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvxwgd/arrangements.hpp"
#include "cvxwgd/conic.hpp"
#include "cvxwgd/densela.hpp"
#include "cvxwgd/srelu_net.hpp"
#include "cvxwgd/targets.hpp"

namespace cvxwgd {

enum class ArrangementPolicy { automatic, exact2d, sampled };

struct ArrangementSettings {
  ArrangementPolicy policy = ArrangementPolicy::automatic;  // automatic: exact when d = 2
  std::size_t samples = 30;
};

ArrangementSet make_arrangements(const Mat& x, const ArrangementSettings& settings, std::uint64_t seed);

struct ParticleEnsemble {
  Mat x;
  std::size_t iteration = 0;
};

/// N rows of mean + scale * xi, xi ~ N(0, I).
Mat init_ensemble(std::size_t n, const Vec& mean, double scale, std::uint64_t seed);

struct CnwdState {
  ParticleEnsemble ensemble;
  double beta_tilde = 1.0;
  double gamma1 = 0.95;
  double gamma2 = std::pow(0.95, 10);
  double step_size = 1e-3;
  ArrangementSettings arrangements;
  std::uint64_t seed = 0;
  SolverSettings solver;
  bool beta_precheck = true;  // skip the relaxed dual when bt < bt_1(X)
};

struct IterationRecord {
  std::size_t iteration = 0;
  double beta_tilde = 0.0;  // value in effect during the iteration
  bool feasible = false;
  double update_norm = 0.0;  // mean row norm of the applied direction
  std::string solver_status;
  std::optional<double> mmd;
  double beta_tilde_min = 0.0;
  std::size_t num_patterns = 0;
};

/// One outer iteration. Feasible: X += step (L* + Y), bt *= gamma1.
/// Infeasible (bt < bt_1 or solver suspects infeasibility): X kept, bt /= gamma2.
IterationRecord cnwd_step(CnwdState& state, const TargetModel& model);

/// Trains from theta_prev on the current particles, then x_n -= step grad Phi(x_n).
NetworkParams wgd_nn_step(ParticleEnsemble& ensemble, const TargetModel& model, const NetworkParams& theta_prev,
                          double beta, double lr, int sub_iters, double step_size,
                          double* update_norm = nullptr);

enum class Method { cvxnn, nn };
std::string to_string(Method m);

struct RunSettings {
  Method method = Method::cvxnn;
  std::size_t iterations = 100;
  double step_size = 1e-3;
  double beta = 1.0;
  double gamma1 = 0.95;
  double gamma2 = std::pow(0.95, 10);
  ArrangementSettings arrangements;
  bool beta_precheck = true;
  std::size_t neurons = 200;
  double lr = 1e-3;
  int sub_iters = 200;
  double beta_decay = 0.95;
  bool nn_cold_start = false;
  bool early_stop = false;
  std::uint64_t seed = 0;
  SolverSettings solver;
};

struct Trajectory {
  Mat initial;
  Mat final;
  std::vector<IterationRecord> records;
  std::optional<double> initial_mmd;
};

/// Called after every iteration with the record and the current particles.
using IterationObserver = std::function<void(const IterationRecord&, const Mat&)>;

/// Runs the chosen method for a fixed budget. MMD^2 to `reference` is recorded
/// per iteration when given. Failures surface as StepError with the index.
Trajectory run(const Mat& x0, const TargetModel& model, const RunSettings& settings,
               const Mat* reference = nullptr, const IterationObserver& observer = {});

}  // namespace cvxwgd
