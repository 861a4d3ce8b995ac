#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>

#include "stochstab/experiment.hpp"

using namespace stochstab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  static const auto root = [] {
    std::random_device rd;
    auto p = fs::temp_directory_path() / ("stochstab_tests_" + std::to_string(rd()));
    fs::create_directories(p);
    return p;
  }();
  auto p = root / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

ExperimentConfig base(Subcommand sub, const std::string& problem, const std::string& out) {
  ExperimentConfig c;
  c.subcommand = sub;
  c.problem = problem;
  c.output = scratch(out);
  return c;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("registry") {
    CHECK(problem_registry().size() == 9);
    CHECK(find_problem("circle-sine").drift == "sin:2,1");
    CHECK(find_problem("torus-cellular").domain == "torus");
    CHECK_THROWS_AS(find_problem("circle-cosine"), ConfigError);
    CHECK(parse_subcommand("gradflow") == Subcommand::gradflow);
    CHECK(std::string(to_string(Subcommand::torus)) == "torus");
    CHECK_THROWS_AS(parse_subcommand("plot"), ConfigError);
  }

  TEST_CASE("validation") {
    auto c = base(Subcommand::solve, "circle-sine", "validation");
    c.eps = {0.1};
    CHECK_NOTHROW(c.validate());
    CHECK(c.grid_points() == 512);

    auto bad = c;
    bad.eps = {0.1, 0.05};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.problem = "torus-cellular";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.drift = "sin:2";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.drift = "sin:0.5,1";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.gamma = "cos:0.2,0.5";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.n = 63;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.eps = {-0.1};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.solver = "spectral";
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    auto conv = base(Subcommand::converge, "circle-sine", "validation");
    conv.eps = {0.1, 0.2, 0.05};
    CHECK_THROWS_AS(conv.validate(), ConfigError);

    auto torus = base(Subcommand::torus, "torus-cellular", "validation");
    torus.eps = {0.1};
    CHECK(torus.grid_points() == 64);
    torus.gamma_matrices = {"1,2,1"};
    CHECK_THROWS_AS(torus.validate(), ConfigError);
    torus.gamma_matrices = {"1,0"};
    CHECK_THROWS_AS(torus.validate(), ConfigError);

    auto sim = base(Subcommand::simulate, "circle-sine", "validation");
    sim.eps = {0.1};
    sim.scheme = "milstein";
    CHECK_THROWS_AS(sim.validate(), ConfigError);
  }

  TEST_CASE("invalid configs leave no output behind") {
    auto c = base(Subcommand::solve, "circle-sine", "rejected");
    c.eps = {};
    CHECK_THROWS_AS(run(c), ConfigError);
    CHECK_FALSE(fs::exists(c.output));
  }

  TEST_CASE("solve with constant drift has a zero residual column") {
    auto c = base(Subcommand::solve, "circle-constant", "solve_constant");
    c.eps = {0.1};
    const auto m = run(c);
    CHECK(m.passed);
    std::istringstream csv(slurp(c.output / "density.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,rho0,rho_eps,r_eps");
    int rows = 0;
    while (std::getline(csv, line)) {
      CHECK(line.substr(line.rfind(',') + 1) == "0");
      ++rows;
    }
    CHECK(rows == 512);
  }

  TEST_CASE("solve cross-checks finite differences") {
    auto c = base(Subcommand::solve, "circle-sine", "solve_cross");
    c.eps = {0.1};
    c.fd_n = {128, 256, 512};
    const auto m = run(c);
    CHECK(m.passed);
    CHECK(fs::exists(c.output / "cross_solver.csv"));
  }

  TEST_CASE("converge reports certificates and slopes") {
    auto c = base(Subcommand::converge, "circle-sine", "converge");
    c.eps = {0.2, 0.1, 0.05, 0.02, 0.01};
    const auto m = run(c);
    CHECK(m.passed);
    const auto s = read_json(c.output / "summary.json");
    CHECK(s["passed"] == true);
    CHECK(s["results"]["slopes"]["l2"]["slope"].get<double>() >= 0.9);
  }

  TEST_CASE("manifest digests match the artifacts") {
    auto c = base(Subcommand::gradflow, "gradient-cosine", "manifest");
    c.eps = {0.4, 0.2, 0.1, 0.05};
    const auto m = run(c);
    CHECK(m.passed);
    CHECK(m.version == kVersion);
    REQUIRE_FALSE(m.artifacts.empty());
    CHECK(m.artifacts.back().file == "summary.json");
    for (const auto& a : m.artifacts) {
      CHECK(a.sha256 == sha256_file(c.output / a.file));
      CHECK(a.sha256.size() == 64);
      CHECK(a.bytes == fs::file_size(c.output / a.file));
    }
    const auto mj = read_json(c.output / "manifest.json");
    CHECK(mj["artifacts"].size() == m.artifacts.size());
    CHECK(mj["config"]["problem"] == "gradient-cosine");
    CHECK(mj.contains("timings_seconds"));
    CHECK_FALSE(read_json(c.output / "summary.json").contains("timings_seconds"));
  }

  TEST_CASE("known digest") {
    const auto p = scratch("digest.txt");
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("reruns with the same seed reproduce every artifact") {
    auto a = base(Subcommand::simulate, "circle-sine", "sim_a");
    a.eps = {0.1};
    a.steps = 50000;
    a.trajectories = 4;
    a.tolerance = 0.2;
    auto b = a;
    b.output = scratch("sim_b");
    b.threads = 1;
    const auto ma = run(a);
    const auto mb = run(b);
    REQUIRE(ma.artifacts.size() == mb.artifacts.size());
    for (std::size_t i = 0; i < ma.artifacts.size(); ++i) {
      CHECK(ma.artifacts[i].file == mb.artifacts[i].file);
      CHECK(ma.artifacts[i].sha256 == mb.artifacts[i].sha256);
    }
  }

  TEST_CASE("torus rigidity on the cellular flow") {
    auto c = base(Subcommand::torus, "torus-cellular", "torus");
    c.eps = {0.1};
    c.gamma_matrices = {"1,0,1", "1,0,2"};
    c.contrast = true;
    const auto m = run(c);
    CHECK(m.passed);
    const auto s = read_json(c.output / "summary.json");
    for (const auto& r : s["results"]["results"]) CHECK(r["rigidity"]["verdict"] == "r = 0");
    CHECK(s["results"]["inhomogeneous_contrast"]["l1_from_uniform"].get<double>() > 0.0);
    CHECK(fs::exists(c.output / "density_g1_e0.csv"));
  }

  TEST_CASE("failed checks are reported, not thrown") {
    auto c = base(Subcommand::simulate, "circle-sine", "sim_fail");
    c.eps = {0.1};
    c.steps = 2000;
    c.trajectories = 1;
    c.tolerance = 1e-6;
    const auto m = run(c);
    CHECK_FALSE(m.passed);
    CHECK_FALSE(m.failures.empty());
    CHECK(read_json(c.output / "summary.json")["passed"] == false);
  }
}
