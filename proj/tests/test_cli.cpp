#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cvxwgd/commands.hpp"
#include "cvxwgd/config.hpp"
#include "cvxwgd/csv.hpp"
#include "cvxwgd/errors.hpp"

using namespace cvxwgd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cvxwgd_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config_error(const std::string& text) {
  try {
    (void)parse_config_text(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

ExperimentConfig small_run(const fs::path& dir, std::size_t iterations) {
  ExperimentConfig c = parse_config_text("[experiment]\nseed = 3\n[particles]\nn = 6\n[dynamics]\niterations = " +
                                         std::to_string(iterations) + "\n[reference]\nsamples = 40\nchains = 4\nburn_in = 200\n");
  c.output_dir = dir.string();
  return c;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("config defaults") {
  const ExperimentConfig c = parse_config_text("");
  CHECK(c.method == ExperimentMethod::cvxnn);
  CHECK(c.n_particles == 50);
  CHECK(c.run.iterations == 100);
  CHECK(c.run.step_size == 1e-3);
  CHECK(c.run.beta == 1.0);
  CHECK(c.run.gamma1 == 0.95);
  CHECK(c.run.gamma2 == doctest::Approx(std::pow(0.95, 10)).epsilon(1e-15));
  CHECK(c.run.neurons == 200);
  CHECK(c.run.lr == 1e-3);
  CHECK(c.run.sub_iters == 200);
  CHECK(c.target.kind == "double_banana");
  CHECK(c.reference.samples == 300);
}

TEST_CASE("config overrides") {
  const ExperimentConfig c = parse_config_text(
      "# comment\n[experiment]\nmethod = nn\nseed = 42\n\n[dynamics]\nbeta = 10\narrangements = sampled\nsamples = 12\n"
      "[target]\nkind = gaussian\ndim = 2\nmean = 1, 2\ncov = 2, 0, 0, 1\n[particles]\ninit_mean = 3, 3\ninit_scale = 0.5\n");
  CHECK(c.method == ExperimentMethod::nn);
  CHECK(c.seed == 42);
  CHECK(c.run.beta == 10.0);
  CHECK(c.run.arrangements.policy == ArrangementPolicy::sampled);
  CHECK(c.run.arrangements.samples == 12);
  CHECK(c.target.mean == Vec{1, 2});
  CHECK(c.init_mean == Vec{3, 3});
  CHECK(c.init_scale == 0.5);
  const RunSettings rs = c.resolved_run();
  CHECK(rs.method == Method::nn);
  CHECK(rs.seed == 42);
  CHECK(rs.beta == 10.0);
}

TEST_CASE("config errors carry line numbers") {
  const std::string g = config_error("[dynamics]\n\ngamma1 = 1.5\n");
  CHECK(g.find("cfg:3") != std::string::npos);
  CHECK(g.find("gamma1") != std::string::npos);
  CHECK(config_error("[dynamics]\nbogus = 1\n").find("cfg:2") != std::string::npos);
  CHECK(config_error("[nosuch]\n").find("cfg:1") != std::string::npos);
  CHECK(config_error("[dynamics]\nbeta = abc\n").find("cfg:2") != std::string::npos);
  CHECK(config_error("[dynamics]\nbeta 1\n").find("cfg:2") != std::string::npos);
  CHECK(config_error("[dynamics]\nstep_size = -1\n").find("step_size") != std::string::npos);
  CHECK_FALSE(config_error("[experiment]\nmethod = other\n").empty());
  CHECK_THROWS_AS(parse_config("/nonexistent/cvxwgd.cfg"), ConfigError);
}

TEST_CASE("resolved config echo") {
  const auto entries = config_entries(parse_config_text("[dynamics]\nbeta = 10\n"));
  bool found = false;
  for (const auto& [k, v] : entries) found = found || (k == "dynamics.beta" && v == "10");
  CHECK(found);
  CHECK(entries.front().first == "experiment.method");
}

TEST_CASE("sample csv round trip and errors") {
  const Mat x{{0.1, -2.5e-300}, {1.0 / 3.0, 7.0}};
  std::stringstream ss;
  write_samples_csv(ss, x);
  CHECK(ss.str().rfind("x0,x1\n", 0) == 0);
  CHECK(read_samples_csv(ss) == x);
  CHECK(format_double(0.1) == "0.10000000000000001");
  std::istringstream bad("x0,x1\n1,2\n3\n");
  try {
    (void)read_samples_csv(bad, "f.csv");
    FAIL("expected error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("f.csv:3") != std::string::npos);
  }
  std::istringstream nan_row("x0\nfoo\n");
  CHECK_THROWS_AS(read_samples_csv(nan_row), ConfigError);
}

TEST_CASE("zero-iteration run writes header-only trace and the initial particles") {
  const fs::path dir = scratch("zero");
  const ExperimentConfig c = small_run(dir, 0);
  std::ostringstream out, err;
  CHECK(cmd_run(c, out, err) == 0);
  CHECK(slurp(dir / "trace.csv") == "iter,beta_tilde,feasible,update_norm,mmd,solver_status\n");
  CHECK(read_samples_csv((dir / "samples_0000.csv").string()) == initial_particles(c));
  CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("short run: trace rows, checkpoints, summary and determinism") {
  const fs::path d1 = scratch("run1"), d2 = scratch("run2");
  ExperimentConfig c = small_run(d1, 4);
  c.checkpoint_every = 2;
  std::ostringstream out, err;
  REQUIRE(cmd_run(c, out, err) == 0);
  const std::string trace = slurp(d1 / "trace.csv");
  CHECK(count_lines(trace) == 5);
  CHECK(fs::exists(d1 / "samples_0002.csv"));
  CHECK(fs::exists(d1 / "samples_0004.csv"));
  const std::string summary = slurp(d1 / "summary.json");
  for (const char* key : {"\"final_mmd\"", "\"wall_time_s\"", "\"seed\"", "\"config\"", "\"final_rmse_mean\""})
    CHECK(summary.find(key) != std::string::npos);
  c.output_dir = d2.string();
  REQUIRE(cmd_run(c, out, err) == 0);
  for (const char* f : {"trace.csv", "samples_0000.csv", "samples_0002.csv", "samples_0004.csv"})
    CHECK(slurp(d1 / f) == slurp(d2 / f));
}

TEST_CASE("failed run keeps partial outputs and exits nonzero") {
  const fs::path dir = scratch("fail");
  ExperimentConfig c = small_run(dir, 3);
  c.n_particles = 1;
  c.init_mean = {1.0, 1.0};
  c.init_scale = 0.0;
  std::ostringstream out, err;
  CHECK(cmd_run(c, out, err) == 2);
  CHECK(err.str().find("iteration 1") != std::string::npos);
  CHECK(fs::exists(dir / "samples_0000.csv"));
  CHECK(slurp(dir / "summary.json").find("\"error\"") != std::string::npos);
}

TEST_CASE("mmd command") {
  const fs::path dir = scratch("mmd");
  const Mat a{{0, 0}, {1, 2}, {3, 1}};
  const Mat b{{3, 1}, {0, 0}, {1, 2}};
  write_samples_csv((dir / "a.csv").string(), a);
  write_samples_csv((dir / "b.csv").string(), b);
  write_samples_csv((dir / "c.csv").string(), Mat{{10, 10}, {11, 12}});
  write_samples_csv((dir / "d.csv").string(), Mat{{1}});
  std::ostringstream out, err;
  CHECK(cmd_mmd((dir / "a.csv").string(), (dir / "a.csv").string(), out, err) == 0);
  CHECK(out.str() == "0\n");
  out.str("");
  CHECK(cmd_mmd((dir / "a.csv").string(), (dir / "b.csv").string(), out, err) == 0);
  CHECK(std::stod(out.str()) < 1e-15);
  out.str("");
  CHECK(cmd_mmd((dir / "a.csv").string(), (dir / "c.csv").string(), out, err) == 0);
  CHECK(std::stod(out.str()) > 0.1);
  CHECK(cmd_mmd((dir / "a.csv").string(), (dir / "d.csv").string(), out, err) != 0);
}

TEST_CASE("betarange: ordering, determinism, speed") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig c = parse_config_text("[particles]\nn = 4\n");
    c.seed = seed;
    std::ostringstream o1, o2, err;
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(cmd_betarange(c, o1, err) == 0);
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
    CHECK(cmd_betarange(c, o2, err) == 0);
    CHECK(o1.str() == o2.str());
    std::istringstream is(o1.str());
    std::string key;
    double patterns = 0, bmin = 0, shut = 0;
    is >> key >> patterns >> key >> bmin >> key >> shut;
    CHECK(bmin <= shut + 1e-6);
  }
}

TEST_CASE("reference command") {
  const fs::path dir = scratch("ref");
  ExperimentConfig c = small_run(dir, 0);
  std::ostringstream out, err;
  CHECK(cmd_reference(c, out, err) == 0);
  CHECK(read_samples_csv((dir / "reference.csv").string()).rows() == 40);
}

TEST_CASE("command-line binary") {
  const fs::path dir = scratch("bin");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "[experiment]\noutput_dir = " << (dir / "out").string()
                     << "\n[particles]\nn = 5\n[dynamics]\niterations = 2\n[reference]\nsamples = 20\nchains = 2\nburn_in = 100\n";
  const std::string bin = CVXWGD_CLI_PATH;
  CHECK(std::system(("CVXWGD_LOG_LEVEL=quiet " + bin + " run --config " + cfg.string() + " > " +
                     (dir / "stdout.txt").string()).c_str()) == 0);
  CHECK(slurp(dir / "stdout.txt").empty());
  CHECK(count_lines(slurp(dir / "out" / "trace.csv")) == 3);
  const std::string s = (dir / "out" / "samples_0002.csv").string();
  CHECK(std::system((bin + " mmd " + s + " " + s + " > " + (dir / "mmd.txt").string()).c_str()) == 0);
  CHECK(slurp(dir / "mmd.txt") == "0\n");
  CHECK(std::system((bin + " betarange --config " + cfg.string() + " > /dev/null").c_str()) == 0);
  CHECK(std::system((bin + " run --config /nonexistent.cfg 2> /dev/null").c_str()) != 0);
  CHECK(std::system((bin + " 2> /dev/null > /dev/null").c_str()) != 0);
}
