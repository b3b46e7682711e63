#include "cvxwgd/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <variant>

#include "json.hpp"

#include "cvxwgd/csv.hpp"
#include "cvxwgd/dynamics.hpp"
#include "cvxwgd/errors.hpp"
#include "cvxwgd/metrics.hpp"
#include "cvxwgd/reference.hpp"
#include "cvxwgd/sdp.hpp"
#include "cvxwgd/seeding.hpp"

namespace cvxwgd {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string checkpoint_name(std::size_t iter) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "samples_%04zu.csv", iter);
  return buf;
}

json config_json(const ExperimentConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config_entries(config)) j[k] = v;
  return j;
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Reference moments: exact for Gaussian targets, empirical (1/N) otherwise.
void reference_moments(const TargetModel& model, const Mat* ref, Vec& mean, Vec& var) {
  if (const auto* g = std::get_if<GaussianTarget>(&model.params())) {
    mean = g->mean;
    var.resize(mean.size());
    for (std::size_t c = 0; c < mean.size(); ++c) var[c] = g->cov(c, c);
    return;
  }
  if (ref == nullptr) return;
  const std::size_t d = ref->cols();
  const double n = static_cast<double>(ref->rows());
  mean.assign(d, 0.0);
  var.assign(d, 0.0);
  for (std::size_t i = 0; i < ref->rows(); ++i)
    for (std::size_t c = 0; c < d; ++c) mean[c] += (*ref)(i, c) / n;
  for (std::size_t i = 0; i < ref->rows(); ++i)
    for (std::size_t c = 0; c < d; ++c) var[c] += ((*ref)(i, c) - mean[c]) * ((*ref)(i, c) - mean[c]) / n;
}

}  // namespace

Mat initial_particles(const ExperimentConfig& config) {
  const Vec mean = config.init_mean.empty() ? Vec(config.target.dim, 0.0) : config.init_mean;
  return init_ensemble(config.n_particles, mean, config.init_scale, derive_seed(config.seed, "init"));
}

Mat reference_samples(const ExperimentConfig& config, double* acceptance_rate) {
  if (!config.reference.path.empty()) {
    Mat ref = read_samples_csv(config.reference.path);
    if (ref.cols() != config.target.dim) throw ConfigError(config.reference.path + ": dimension does not match target");
    if (acceptance_rate) *acceptance_rate = 1.0;
    return ref;
  }
  const TargetModel model = config.target.build();
  const Mat starts = init_ensemble(config.reference.chains, Vec(config.target.dim, 0.0), 1.0,
                                   derive_seed(config.seed, "chain-start"));
  ChainResult res = langevin_chains(model, starts, config.reference.chain_config(derive_seed(config.seed, "chain")));
  if (acceptance_rate) *acceptance_rate = res.acceptance_rate;
  const std::size_t keep = std::min(config.reference.samples, res.samples.rows());
  return Mat(keep, res.samples.cols(),
             Vec(res.samples.vec().begin(), res.samples.vec().begin() + static_cast<long>(keep * res.samples.cols())));
}

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  if (config.method == ExperimentMethod::reference) return cmd_reference(config, out, err);
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  const TargetModel model = config.target.build();
  const Mat x0 = initial_particles(config);
  const Mat ref = reference_samples(config);
  Vec ref_mean, ref_var;
  reference_moments(model, &ref, ref_mean, ref_var);

  write_samples_csv((dir / checkpoint_name(0)).string(), x0);
  std::ofstream trace(dir / "trace.csv", std::ios::binary);
  if (!trace) throw ConfigError((dir / "trace.csv").string() + ": cannot open for writing");
  trace << "iter,beta_tilde,feasible,update_norm,mmd,solver_status\n";

  Mat last = x0;
  std::size_t done = 0;
  auto observer = [&](const IterationRecord& r, const Mat& x) {
    trace << r.iteration << ',' << format_double(r.beta_tilde) << ',' << (r.feasible ? 1 : 0) << ','
          << format_double(r.update_norm) << ',' << (r.mmd ? format_double(*r.mmd) : "") << ',' << r.solver_status
          << '\n';
    trace.flush();
    last = x;
    done = r.iteration;
    if (config.checkpoint_every > 0 && r.iteration % config.checkpoint_every == 0) {
      write_samples_csv((dir / checkpoint_name(r.iteration)).string(), x);
    }
  };

  json summary;
  summary["method"] = to_string(config.method);
  summary["seed"] = config.seed;
  int code = 0;
  std::optional<double> initial_mmd;
  try {
    const Trajectory traj = run(x0, model, config.resolved_run(), &ref, observer);
    initial_mmd = traj.initial_mmd;
    summary["status"] = "ok";
  } catch (const StepError& e) {
    err << "run failed: " << e.what() << '\n';
    summary["status"] = "error";
    summary["error"] = e.what();
    code = 2;
  }
  if (done > 0 && (config.checkpoint_every == 0 || done % config.checkpoint_every != 0)) {
    write_samples_csv((dir / checkpoint_name(done)).string(), last);
  }
  if (!initial_mmd) initial_mmd = mmd2(x0, ref);

  summary["iterations_completed"] = done;
  summary["initial_mmd"] = number_or_null(initial_mmd);
  summary["final_mmd"] = mmd2(last, ref);
  if (!ref_mean.empty()) {
    const MomentRmse m0 = moment_rmse(x0, ref_mean, ref_var);
    const MomentRmse m1 = moment_rmse(last, ref_mean, ref_var);
    summary["initial_rmse_mean"] = m0.mean;
    summary["initial_rmse_var"] = m0.var;
    summary["final_rmse_mean"] = m1.mean;
    summary["final_rmse_var"] = m1.var;
  }
  summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary["config"] = config_json(config);
  std::ofstream sj(dir / "summary.json", std::ios::binary);
  sj << summary.dump(2) << '\n';

  out << "iterations " << done << "  final MMD^2 " << format_double(summary["final_mmd"].get<double>()) << '\n';
  return code;
}

int cmd_betarange(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const TargetModel model = config.target.build();
  const Mat x = initial_particles(config);
  const Mat y = score_matrix(model, x);
  const ArrangementSet arr = make_arrangements(x, config.run.arrangements, derive_seed(config.seed, "arrangements", 0));
  const auto blocks = build_blocks(x, arr);
  const BetaMinResult bm = solve_beta_min(x, blocks, config.solver);
  if (bm.status != SolveStatus::optimal) {
    err << "beta_min solve ended with status " << to_string(bm.status) << '\n';
    return 3;
  }
  const double shut = shutdown_threshold(y, x, blocks, config.solver);
  out << "patterns " << blocks.size() << '\n';
  out << "beta_tilde_min " << format_double(bm.beta_tilde_min) << '\n';
  out << "beta_tilde_shutdown " << format_double(shut) << '\n';
  out << "beta_tilde_initial " << format_double(beta_tilde_from_beta(x.rows(), config.run.beta)) << '\n';
  if (bm.beta_tilde_min > shut + 1e-6) {
    err << "ordering violated: beta_tilde_min exceeds the shutdown threshold\n";
    return 4;
  }
  return 0;
}

int cmd_mmd(const std::string& path_a, const std::string& path_b, std::ostream& out, std::ostream& err) {
  const Mat a = read_samples_csv(path_a);
  const Mat b = read_samples_csv(path_b);
  if (a.cols() != b.cols()) {
    err << "dimension mismatch: " << a.cols() << " vs " << b.cols() << '\n';
    return 1;
  }
  out << format_double(mmd2(a, b)) << '\n';
  return 0;
}

int cmd_reference(const ExperimentConfig& config, std::ostream& out, std::ostream& /*err*/) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  double acc = 0.0;
  const Mat ref = reference_samples(config, &acc);
  write_samples_csv((dir / "reference.csv").string(), ref);
  out << "samples " << ref.rows() << "  acceptance " << format_double(acc) << '\n';
  return 0;
}

}  // namespace cvxwgd
