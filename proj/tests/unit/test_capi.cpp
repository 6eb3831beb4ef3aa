#include "tdhfb/tdhfb.h"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

TEST_CASE("version and error strings") {
  CHECK(std::strlen(tdhfb_version()) > 0);
  tdhfb_config* cfg = nullptr;
  CHECK(tdhfb_config_parse("physics:\n  beta: 0.9\n", &cfg) == TDHFB_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(tdhfb_last_error()).find("beta") != std::string::npos);
  CHECK(tdhfb_config_parse("scenario: free\n", nullptr) == TDHFB_ERR_ARGUMENT);
  CHECK(tdhfb_config_load("/nonexistent.yaml", &cfg) == TDHFB_ERR_CONFIG);
}

TEST_CASE("config handle setters") {
  tdhfb_config* cfg = nullptr;
  REQUIRE(tdhfb_config_default(&cfg) == TDHFB_OK);
  CHECK(tdhfb_config_set_scenario(cfg, "fock") == TDHFB_OK);
  CHECK(tdhfb_config_set_scenario(cfg, "bogus") == TDHFB_ERR_CONFIG);
  CHECK(tdhfb_config_set_seed(cfg, 7) == TDHFB_OK);
  CHECK(tdhfb_config_validate(cfg) == TDHFB_OK);
  tdhfb_config_free(cfg);
}

TEST_CASE("simulation handle") {
  tdhfb_config* cfg = nullptr;
  REQUIRE(tdhfb_config_parse("grid:\n  M: 32\n  L: 12\nphysics:\n  N: 100\n  beta: 0.3\n", &cfg) == TDHFB_OK);
  tdhfb_simulation* sim = nullptr;
  REQUIRE(tdhfb_simulation_create(cfg, &sim) == TDHFB_OK);
  CHECK(tdhfb_simulation_grid_size(sim) == 32);
  tdhfb_observables o0{}, o1{};
  REQUIRE(tdhfb_simulation_observables(sim, &o0) == TDHFB_OK);
  CHECK(o0.t == 0.0);
  CHECK(o0.particle_number > 100.0);
  REQUIRE(tdhfb_simulation_advance(sim, 0.1) == TDHFB_OK);
  CHECK(tdhfb_simulation_time(sim) == doctest::Approx(0.1));
  REQUIRE(tdhfb_simulation_observables(sim, &o1) == TDHFB_OK);
  CHECK(std::abs(o1.particle_number - o0.particle_number) < 1e-8 * o0.particle_number);
  CHECK(std::abs(o1.energy - o0.energy) < 1e-6 * std::abs(o0.energy));
  std::vector<double> buf(64);
  CHECK(tdhfb_simulation_phi(sim, buf.data(), buf.size()) == TDHFB_OK);
  CHECK(tdhfb_simulation_phi(sim, buf.data(), 10) == TDHFB_ERR_ARGUMENT);
  CHECK(tdhfb_simulation_advance(sim, -1.0) == TDHFB_ERR_ARGUMENT);
  tdhfb_simulation_free(sim);
  tdhfb_config_free(cfg);
}

TEST_CASE("run writes artifacts") {
  const fs::path dir = fs::temp_directory_path() / "tdhfb_capi_run";
  fs::remove_all(dir);
  tdhfb_config* cfg = nullptr;
  REQUIRE(tdhfb_config_parse("scenario: identities\nidentities:\n  count: 4\n  M: 16\n", &cfg) == TDHFB_OK);
  REQUIRE(tdhfb_config_set_out_dir(cfg, dir.c_str()) == TDHFB_OK);
  CHECK(tdhfb_run(cfg) == TDHFB_OK);
  CHECK(fs::exists(dir / "manifest.yaml"));
  CHECK(fs::exists(dir / "summary.csv"));
  tdhfb_config_free(cfg);
  fs::remove_all(dir);
}
