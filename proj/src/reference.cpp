#include "cvxwgd/reference.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <string>
#include <vector>

#include "cvxwgd/errors.hpp"
#include "cvxwgd/seeding.hpp"

namespace cvxwgd {

namespace {

// log q(to | from) up to the shared constant
double log_proposal(const Vec& to, const Vec& from, const Vec& score_from, double eps) {
  double s = 0.0;
  for (std::size_t c = 0; c < to.size(); ++c) {
    const double r = to[c] - from[c] - eps * score_from[c];
    s += r * r;
  }
  return -s / (4.0 * eps);
}

}  // namespace

void ChainConfig::validate() const {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("chain step size must be nonnegative");
  if (burn_in >= n_steps) throw ConfigError("burn_in must be smaller than n_steps");
  if (thinning == 0) throw ConfigError("thinning must be at least 1");
}

ChainResult langevin_chain(const TargetModel& model, const Vec& x0, const ChainConfig& config) {
  config.validate();
  if (x0.size() != model.dim()) throw DimensionError("chain start does not match the target dimension");
  for (double v : x0) {
    if (!std::isfinite(v)) throw PreconditionError("chain start must be finite");
  }
  const std::size_t d = x0.size();
  const std::size_t kept = (config.n_steps - config.burn_in) / config.thinning;
  ChainResult out{Mat(kept, d), 1.0};

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double noise = std::sqrt(2.0 * config.eps);

  Vec x = x0;
  Vec g;
  double lp = 0.0;
  std::size_t accepted = 0;
  std::size_t row = 0;
  Vec prop(d);
  for (std::size_t step = 0; step < config.n_steps; ++step) {
    try {
      if (g.empty()) {
        g = score(model, x);
        if (config.use_metropolis) lp = log_density(model, x);
      }
      for (std::size_t c = 0; c < d; ++c) prop[c] = x[c] + config.eps * g[c] + noise * gauss(rng);
      if (config.use_metropolis) {
        const Vec gp = score(model, prop);
        const double lpp = log_density(model, prop);
        const double log_a = lpp - lp + log_proposal(x, prop, gp, config.eps) - log_proposal(prop, x, g, config.eps);
        if (std::log(unif(rng)) < log_a) {
          x = prop;
          g = gp;
          lp = lpp;
          ++accepted;
        }
      } else {
        x = prop;
        g = score(model, x);
        ++accepted;
      }
    } catch (const std::exception& e) {
      throw NumericError("chain step " + std::to_string(step) + ": " + e.what());
    }
    if (step >= config.burn_in && (step - config.burn_in) % config.thinning == config.thinning - 1 && row < kept) {
      out.samples.set_row(row++, x);
    }
  }
  out.acceptance_rate = config.n_steps > 0 ? static_cast<double>(accepted) / static_cast<double>(config.n_steps) : 1.0;
  return out;
}

ChainResult langevin_chains(const TargetModel& model, const Mat& starts, const ChainConfig& config) {
  const std::size_t chains = starts.rows();
  if (chains == 0) throw ConfigError("at least one chain is required");
  std::vector<ChainResult> results(chains);
  std::vector<std::exception_ptr> errors(chains);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < chains; ++c) {
    try {
      ChainConfig cc = config;
      cc.seed = derive_seed(config.seed, "chain", c);
      results[c] = langevin_chain(model, starts.row_vec(c), cc);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const std::size_t per = results[0].samples.rows();
  ChainResult out{Mat(per * chains, starts.cols()), 0.0};
  for (std::size_t c = 0; c < chains; ++c) {
    for (std::size_t i = 0; i < per; ++i) out.samples.set_row(c * per + i, results[c].samples.row(i));
    out.acceptance_rate += results[c].acceptance_rate / static_cast<double>(chains);
  }
  return out;
}

}  // namespace cvxwgd
