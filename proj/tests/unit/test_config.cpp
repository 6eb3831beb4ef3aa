#include "tdhfb/config.hpp"
#include "tdhfb/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace tdhfb;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_config_string(text, "cfg.yaml");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal file applies defaults") {
  const RunConfig c = parse_config_string("scenario: free\ngrid:\n  M: 64\n");
  const RunConfig d = default_config();
  CHECK(c.scenario == Scenario::free);
  CHECK(c.grid.M == 64);
  CHECK(c.grid.L == d.grid.L);
  CHECK(c.physics.N == d.physics.N);
  CHECK(c.physics.beta == d.physics.beta);
  CHECK(c.time.rtol == d.time.rtol);
  CHECK(std::isinf(c.monitors.lebesgue_exponent));
}

TEST_CASE("beta outside the admissible range is rejected") {
  const std::string e = parse_error("physics:\n  beta: 0.7\n");
  CHECK(contains(e, "beta must lie in [0, 2/3)"));
  CHECK(contains(e, "cfg.yaml:2:"));
  CHECK(contains(e, "physics.beta"));
}

TEST_CASE("duplicate keys report both locations") {
  const std::string e = parse_error("seed: 1\nseed: 2\n");
  CHECK(contains(e, "line 1"));
  CHECK(contains(e, "line 2"));
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK(contains(parse_error("grid:\n  Q: 3\n"), "unknown key"));
  CHECK(contains(parse_error("scenario: nope\n"), "unknown scenario"));
  CHECK(contains(parse_error("grid:\n  M: 100\n"), "grid"));
  CHECK(contains(parse_error("time:\n  dt: -1\n"), "time.dt"));
  CHECK(contains(parse_error("rhs_variant: other\n"), "hermitian or literal"));
  CHECK(contains(parse_error("grid: [1, 2\n"), "cfg.yaml"));
  CHECK(contains(parse_error("init:\n  phi:\n    width: 5\n"), "L/8"));
}

TEST_CASE("lists, complex values and infinity") {
  const RunConfig c = parse_config_string(
      "physics:\n  N_list: [100, 1000]\nmonitors:\n  lebesgue_exponent: 6\n  fit_window: [1, 8]\n"
      "fock:\n  phi: [[1, 0], [0.4, 0.3]]\n  k_hat: [[[0.2, 0], [0, 0.1]], [[0, 0.1], [0.15, 0]]]\n");
  CHECK(c.N_list.size() == 2);
  CHECK(c.monitors.lebesgue_exponent == 6.0);
  CHECK(c.monitors.fit_t_max == 8.0);
  CHECK(c.fock.phi[1] == cplx(0.4, 0.3));
  CHECK(c.fock.k_hat[1] == cplx(0.0, 0.1));
}

TEST_CASE("YAML echo round-trips") {
  RunConfig c = default_config();
  c.scenario = Scenario::fock;
  c.physics.beta = 1.0 / 3.0;
  c.N_list = {100.0, 1000.0};
  c.seed = 42;
  const RunConfig back = parse_config_string(to_yaml(c));
  CHECK(back.scenario == Scenario::fock);
  CHECK(back.physics.beta == c.physics.beta);
  CHECK(back.N_list == c.N_list);
  CHECK(back.seed == 42);
  CHECK(std::isinf(back.monitors.lebesgue_exponent));
  CHECK(to_yaml(back) == to_yaml(c));
}

TEST_CASE("missing file is a config error") {
  CHECK_THROWS_AS(parse_config_file("/nonexistent/cfg.yaml"), Error);
}
