#include "cvxwgd/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "cvxwgd/errors.hpp"
#include "cvxwgd/csv.hpp"
#include "cvxwgd/seeding.hpp"

namespace cvxwgd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out)) throw std::invalid_argument("not a number: '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw std::invalid_argument("not a nonnegative integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

Vec to_list(const std::string& v) {
  Vec out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

std::vector<Vec> to_lists(const std::string& v) {
  std::vector<Vec> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(to_list(trim(item)));
  return out;
}

std::string from_list(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

std::string from_lists(const std::vector<Vec>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + from_list(v[i]);
  return s;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

double positive(const std::string& v) {
  const double x = to_double(v);
  if (!(x > 0.0)) throw std::invalid_argument("must be positive, got " + v);
  return x;
}

double nonneg(const std::string& v) {
  const double x = to_double(v);
  if (!(x >= 0.0)) throw std::invalid_argument("must be nonnegative, got " + v);
  return x;
}

double unit_open(const std::string& v) {
  const double x = to_double(v);
  if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("must lie in (0, 1), got " + v);
  return x;
}

std::size_t count(const std::string& v, std::size_t min) {
  const auto x = to_u64(v);
  if (x < min) throw std::invalid_argument("must be at least " + std::to_string(min) + ", got " + v);
  return static_cast<std::size_t>(x);
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define CVX_FIELD(KEY, SETEXPR, GETEXPR)                                         \
  Field {                                                                        \
    KEY, [](ExperimentConfig& c, const std::string& v) { (void)c; (void)v; SETEXPR; }, \
        [](const ExperimentConfig& c) -> std::string { return GETEXPR; }         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      CVX_FIELD("experiment.method",
                {
                  if (v == "cvxnn") c.method = ExperimentMethod::cvxnn;
                  else if (v == "nn") c.method = ExperimentMethod::nn;
                  else if (v == "reference") c.method = ExperimentMethod::reference;
                  else throw std::invalid_argument("method must be cvxnn, nn or reference, got '" + v + "'");
                },
                to_string(c.method)),
      CVX_FIELD("experiment.seed", c.seed = to_u64(v), std::to_string(c.seed)),
      CVX_FIELD("experiment.output_dir", c.output_dir = v, c.output_dir),
      CVX_FIELD("experiment.checkpoint_every", c.checkpoint_every = count(v, 0), std::to_string(c.checkpoint_every)),

      CVX_FIELD("target.kind",
                {
                  if (v != "double_banana" && v != "gaussian" && v != "standard_normal" && v != "mixture")
                    throw std::invalid_argument("kind must be double_banana, gaussian, standard_normal or mixture");
                  c.target.kind = v;
                },
                c.target.kind),
      CVX_FIELD("target.dim", c.target.dim = count(v, 1), std::to_string(c.target.dim)),
      CVX_FIELD("target.mean", c.target.mean = to_list(v), from_list(c.target.mean)),
      CVX_FIELD("target.cov", c.target.cov = to_list(v), from_list(c.target.cov)),
      CVX_FIELD("target.y_obs", c.target.y_obs = to_list(v), from_list(c.target.y_obs)),
      CVX_FIELD("target.sigma_noise", c.target.sigma_noise = positive(v), format_double(c.target.sigma_noise)),
      CVX_FIELD("target.sigma_prior", c.target.sigma_prior = positive(v), format_double(c.target.sigma_prior)),
      CVX_FIELD("target.weights", c.target.weights = to_list(v), from_list(c.target.weights)),
      CVX_FIELD("target.means", c.target.means = to_lists(v), from_lists(c.target.means)),
      CVX_FIELD("target.covs", c.target.covs = to_lists(v), from_lists(c.target.covs)),

      CVX_FIELD("particles.n", c.n_particles = count(v, 1), std::to_string(c.n_particles)),
      CVX_FIELD("particles.init_mean", c.init_mean = to_list(v), from_list(c.init_mean)),
      CVX_FIELD("particles.init_scale", c.init_scale = nonneg(v), format_double(c.init_scale)),

      CVX_FIELD("dynamics.iterations", c.run.iterations = count(v, 0), std::to_string(c.run.iterations)),
      CVX_FIELD("dynamics.step_size", c.run.step_size = nonneg(v), format_double(c.run.step_size)),
      CVX_FIELD("dynamics.beta", c.run.beta = positive(v), format_double(c.run.beta)),
      CVX_FIELD("dynamics.gamma1", c.run.gamma1 = unit_open(v), format_double(c.run.gamma1)),
      CVX_FIELD("dynamics.gamma2", c.run.gamma2 = unit_open(v), format_double(c.run.gamma2)),
      CVX_FIELD("dynamics.arrangements",
                {
                  if (v == "auto") c.run.arrangements.policy = ArrangementPolicy::automatic;
                  else if (v == "exact2d") c.run.arrangements.policy = ArrangementPolicy::exact2d;
                  else if (v == "sampled") c.run.arrangements.policy = ArrangementPolicy::sampled;
                  else throw std::invalid_argument("arrangements must be auto, exact2d or sampled");
                },
                c.run.arrangements.policy == ArrangementPolicy::automatic ? "auto"
                : c.run.arrangements.policy == ArrangementPolicy::exact2d ? "exact2d"
                                                                           : "sampled"),
      CVX_FIELD("dynamics.samples", c.run.arrangements.samples = count(v, 1),
                std::to_string(c.run.arrangements.samples)),
      CVX_FIELD("dynamics.beta_precheck", c.run.beta_precheck = to_bool(v), from_bool(c.run.beta_precheck)),
      CVX_FIELD("dynamics.early_stop", c.run.early_stop = to_bool(v), from_bool(c.run.early_stop)),

      CVX_FIELD("nn.neurons", c.run.neurons = count(v, 1), std::to_string(c.run.neurons)),
      CVX_FIELD("nn.lr", c.run.lr = positive(v), format_double(c.run.lr)),
      CVX_FIELD("nn.sub_iters", c.run.sub_iters = static_cast<int>(count(v, 0)), std::to_string(c.run.sub_iters)),
      CVX_FIELD("nn.beta_decay", c.run.beta_decay = positive(v), format_double(c.run.beta_decay)),
      CVX_FIELD("nn.cold_start", c.run.nn_cold_start = to_bool(v), from_bool(c.run.nn_cold_start)),

      CVX_FIELD("solver.rho", c.solver.rho = positive(v), format_double(c.solver.rho)),
      CVX_FIELD("solver.sigma", c.solver.sigma = positive(v), format_double(c.solver.sigma)),
      CVX_FIELD("solver.alpha_relax", c.solver.alpha_relax = positive(v), format_double(c.solver.alpha_relax)),
      CVX_FIELD("solver.eps_abs", c.solver.eps_abs = positive(v), format_double(c.solver.eps_abs)),
      CVX_FIELD("solver.eps_rel", c.solver.eps_rel = positive(v), format_double(c.solver.eps_rel)),
      CVX_FIELD("solver.max_iters", c.solver.max_iters = static_cast<int>(count(v, 1)),
                std::to_string(c.solver.max_iters)),
      CVX_FIELD("solver.infeas_check_every", c.solver.infeas_check_every = static_cast<int>(count(v, 1)),
                std::to_string(c.solver.infeas_check_every)),
      CVX_FIELD("solver.adaptive_rho", c.solver.adaptive_rho = to_bool(v), from_bool(c.solver.adaptive_rho)),

      CVX_FIELD("reference.path", c.reference.path = v, c.reference.path),
      CVX_FIELD("reference.samples", c.reference.samples = count(v, 1), std::to_string(c.reference.samples)),
      CVX_FIELD("reference.chains", c.reference.chains = count(v, 1), std::to_string(c.reference.chains)),
      CVX_FIELD("reference.eps", c.reference.eps = positive(v), format_double(c.reference.eps)),
      CVX_FIELD("reference.burn_in", c.reference.burn_in = count(v, 0), std::to_string(c.reference.burn_in)),
      CVX_FIELD("reference.thinning", c.reference.thinning = count(v, 1), std::to_string(c.reference.thinning)),
      CVX_FIELD("reference.metropolis", c.reference.metropolis = to_bool(v), from_bool(c.reference.metropolis)),
  };
  return table;
}

#undef CVX_FIELD

Mat square_from(const Vec& v, std::size_t d, const char* what) {
  if (v.empty()) return Mat::identity(d);
  if (v.size() != d * d) {
    throw ConfigError(std::string(what) + " needs " + std::to_string(d * d) + " entries, got " +
                      std::to_string(v.size()));
  }
  return Mat(d, d, v);
}

}  // namespace

std::string to_string(ExperimentMethod m) {
  switch (m) {
    case ExperimentMethod::cvxnn:
      return "cvxnn";
    case ExperimentMethod::nn:
      return "nn";
    case ExperimentMethod::reference:
      return "reference";
  }
  return "?";
}

TargetModel TargetSpec::build() const {
  if (kind == "double_banana") {
    if (dim != 2) throw ConfigError("double_banana target is two-dimensional");
    return TargetModel::double_banana(y_obs, sigma_noise, sigma_prior);
  }
  if (kind == "standard_normal") return TargetModel::standard_normal(dim);
  if (kind == "gaussian") {
    Vec m = mean.empty() ? Vec(dim, 0.0) : mean;
    if (m.size() != dim) throw ConfigError("target.mean needs " + std::to_string(dim) + " entries");
    return TargetModel::gaussian(m, square_from(cov, dim, "target.cov"));
  }
  if (kind == "mixture") {
    if (weights.empty() || means.size() != weights.size()) {
      throw ConfigError("mixture needs one mean per weight");
    }
    std::vector<Mat> cs;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (means[i].size() != dim) throw ConfigError("mixture mean " + std::to_string(i) + " has wrong length");
      cs.push_back(square_from(covs.empty() ? Vec{} : covs.at(i), dim, "target.covs"));
    }
    if (!covs.empty() && covs.size() != weights.size()) throw ConfigError("mixture needs one covariance per weight");
    return TargetModel::gaussian_mixture(weights, means, cs);
  }
  throw ConfigError("unknown target kind '" + kind + "'");
}

ChainConfig ReferenceSpec::chain_config(std::uint64_t seed) const {
  ChainConfig cc;
  cc.eps = eps;
  cc.burn_in = burn_in;
  cc.thinning = thinning;
  const std::size_t per_chain = (samples + chains - 1) / chains;
  cc.n_steps = burn_in + per_chain * thinning;
  cc.seed = seed;
  cc.use_metropolis = metropolis;
  return cc;
}

void ExperimentConfig::validate() const {
  if (!init_mean.empty() && init_mean.size() != target.dim) {
    throw ConfigError("particles.init_mean needs " + std::to_string(target.dim) + " entries");
  }
  if (target.kind == "double_banana" && target.dim != 2) throw ConfigError("double_banana target is two-dimensional");
  if (run.arrangements.policy == ArrangementPolicy::exact2d && target.dim != 2) {
    throw ConfigError("exact2d arrangements need a two-dimensional target");
  }
  if (!(solver.alpha_relax > 0.0 && solver.alpha_relax < 2.0)) throw ConfigError("solver.alpha_relax must lie in (0, 2)");
  (void)target.build();
}

RunSettings ExperimentConfig::resolved_run() const {
  RunSettings r = run;
  r.method = method == ExperimentMethod::nn ? Method::nn : Method::cvxnn;
  r.seed = seed;
  r.solver = solver;
  return r;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::stringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      static const std::array<std::string_view, 7> known{"experiment", "target", "particles", "dynamics",
                                                         "nn",         "solver", "reference"};
      if (std::find(known.begin(), known.end(), section) == known.end()) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    const auto& tab = fields();
    const auto it = std::find_if(tab.begin(), tab.end(), [&](const Field& f) { return full == f.key; });
    if (it == tab.end()) fail("unknown key '" + full + "'");
    try {
      it->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      fail(full + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

}  // namespace cvxwgd
