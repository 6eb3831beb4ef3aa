#include "tdhfb/errors.hpp"
#include "tdhfb/runner.hpp"

#include <doctest.h>
#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace tdhfb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("tdhfb_runner_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("runs are reproducible byte for byte") {
  RunConfig c = parse_config_string("scenario: free\ngrid:\n  M: 32\n  L: 12\ntime:\n  T: 0.5\n  samples: 5\n");
  std::ostringstream log;
  c.out_dir = scratch("a").string();
  REQUIRE(run(c, log) == exit_ok);
  c.out_dir = scratch("b").string();
  REQUIRE(run(c, log) == exit_ok);
  for (const char* f : {"diagnostics.csv", "summary.csv"}) {
    const std::string a = slurp(fs::temp_directory_path() / "tdhfb_runner_a" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(fs::path(c.out_dir) / f));
    CHECK(a.find('\r') == std::string::npos);
  }
  const YAML::Node m = YAML::LoadFile((fs::path(c.out_dir) / "manifest.yaml").string());
  CHECK(m["status"].as<std::string>() == "ok");
  CHECK(m["exit_code"].as<int>() == 0);
  CHECK(m["config"]["scenario"].as<std::string>() == "free");
  fs::remove_all(fs::path(c.out_dir));
  fs::remove_all(fs::temp_directory_path() / "tdhfb_runner_a");
}

TEST_CASE("insufficient Fock cutoff exits with the truncation code") {
  RunConfig c = default_config();
  c.scenario = Scenario::fock;
  c.fock.n_max = 6;
  c.fock.N_list = {8.0};
  c.out_dir = scratch("fock").string();
  std::ostringstream log;
  CHECK(run(c, log) == exit_truncation);
  const YAML::Node m = YAML::LoadFile((fs::path(c.out_dir) / "manifest.yaml").string());
  CHECK(m["exit_code"].as<int>() == 3);
  CHECK(log.str().find("trunc") != std::string::npos);
  fs::remove_all(fs::path(c.out_dir));
}

TEST_CASE("invalid configuration exits with the config code") {
  RunConfig c = default_config();
  c.physics.beta = 0.8;
  c.out_dir = scratch("bad").string();
  std::ostringstream log;
  CHECK(run(c, log) == exit_config);
  CHECK(log.str().find("beta") != std::string::npos);
  fs::remove_all(fs::path(c.out_dir));
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorCode::config) == exit_config);
  CHECK(exit_code_for(ErrorCode::truncation_insufficient) == exit_truncation);
  CHECK(exit_code_for(ErrorCode::stiffness) == exit_numerical);
  CHECK(exit_code_for(ErrorCode::numerical_blowup) == exit_numerical);
}

TEST_CASE("identities scenario reports every kernel") {
  RunConfig c = default_config();
  c.scenario = Scenario::identities;
  c.identities.count = 6;
  c.identities.M = 16;
  const ScenarioReport r = run_identities(c);
  CHECK(r.summary.rows.size() == 6);
  CHECK(r.metric("kernels_passed") == 6.0);
  CHECK(r.passed);
}
