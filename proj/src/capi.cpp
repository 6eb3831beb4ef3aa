#include "tdhfb/tdhfb.h"

#include "tdhfb/config.hpp"
#include "tdhfb/errors.hpp"
#include "tdhfb/runner.hpp"

#include <iostream>
#include <new>
#include <string>

#ifndef TDHFB_VERSION
#define TDHFB_VERSION "0.0.0"
#endif

struct tdhfb_config {
  tdhfb::RunConfig cfg;
};

struct tdhfb_simulation {
  tdhfb::RunConfig cfg;
  tdhfb::Potential pot;
  tdhfb::State state;
  double t = 0.0;
};

namespace {

thread_local std::string last_error;

tdhfb_status status_of(tdhfb::ErrorCode code) {
  using tdhfb::ErrorCode;
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::domain_too_small: return TDHFB_ERR_CONFIG;
    case ErrorCode::truncation_insufficient: return TDHFB_ERR_TRUNCATION;
    case ErrorCode::argument:
    case ErrorCode::grid_mismatch: return TDHFB_ERR_ARGUMENT;
    case ErrorCode::io: return TDHFB_ERR_IO;
    default: return TDHFB_ERR_NUMERICAL;
  }
}

template <class F>
tdhfb_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const tdhfb::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TDHFB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TDHFB_ERR_INTERNAL;
  }
}

tdhfb_status null_arg(const char* what) {
  last_error = std::string(what) + " is null";
  return TDHFB_ERR_ARGUMENT;
}

}  // namespace

extern "C" {

const char* tdhfb_version(void) { return TDHFB_VERSION; }

const char* tdhfb_last_error(void) { return last_error.c_str(); }

tdhfb_status tdhfb_config_load(const char* path, tdhfb_config** out) {
  if (!path || !out) return null_arg("argument");
  return guarded([&] {
    *out = new tdhfb_config{tdhfb::parse_config_file(path)};
    return TDHFB_OK;
  });
}

tdhfb_status tdhfb_config_parse(const char* text, tdhfb_config** out) {
  if (!text || !out) return null_arg("argument");
  return guarded([&] {
    *out = new tdhfb_config{tdhfb::parse_config_string(text)};
    return TDHFB_OK;
  });
}

tdhfb_status tdhfb_config_default(tdhfb_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new tdhfb_config{tdhfb::default_config()};
    return TDHFB_OK;
  });
}

void tdhfb_config_free(tdhfb_config* cfg) { delete cfg; }

tdhfb_status tdhfb_config_set_scenario(tdhfb_config* cfg, const char* name) {
  if (!cfg || !name) return null_arg("argument");
  return guarded([&] {
    cfg->cfg.scenario = tdhfb::scenario_from_string(name);
    return TDHFB_OK;
  });
}

tdhfb_status tdhfb_config_set_seed(tdhfb_config* cfg, uint64_t seed) {
  if (!cfg) return null_arg("cfg");
  cfg->cfg.seed = seed;
  return TDHFB_OK;
}

tdhfb_status tdhfb_config_set_out_dir(tdhfb_config* cfg, const char* dir) {
  if (!cfg || !dir) return null_arg("argument");
  if (!*dir) {
    last_error = "out_dir must not be empty";
    return TDHFB_ERR_CONFIG;
  }
  cfg->cfg.out_dir = dir;
  return TDHFB_OK;
}

tdhfb_status tdhfb_config_validate(const tdhfb_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    tdhfb::validate(cfg->cfg);
    return TDHFB_OK;
  });
}

tdhfb_status tdhfb_run(const tdhfb_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { return static_cast<tdhfb_status>(tdhfb::run(cfg->cfg, std::cerr)); });
}

tdhfb_status tdhfb_simulation_create(const tdhfb_config* cfg, tdhfb_simulation** out) {
  if (!cfg || !out) return null_arg("argument");
  return guarded([&] {
    const tdhfb::RunConfig& c = cfg->cfg;
    tdhfb::validate(c);
    const tdhfb::Grid g = tdhfb::Grid::make(c.grid.d, c.grid.M, c.grid.L);
    tdhfb::PhysParams p = c.physics;
    p.dim = c.grid.d;
    auto sim = new tdhfb_simulation{c, tdhfb::scale_potential(c.potential, p, g), {}, 0.0};
    try {
      sim->state = tdhfb::reconstruct_state(tdhfb::initial_data(g, p, c.init));
    } catch (...) {
      delete sim;
      throw;
    }
    *out = sim;
    return TDHFB_OK;
  });
}

void tdhfb_simulation_free(tdhfb_simulation* sim) { delete sim; }

tdhfb_status tdhfb_simulation_advance(tdhfb_simulation* sim, double dt_total) {
  if (!sim) return null_arg("sim");
  if (!(dt_total >= 0.0)) {
    last_error = "advance: interval must be non-negative";
    return TDHFB_ERR_ARGUMENT;
  }
  if (dt_total == 0.0) return TDHFB_OK;
  return guarded([&] {
    auto traj = tdhfb::evolve(sim->state, sim->pot, dt_total, sim->cfg.time, {dt_total}, nullptr,
                              tdhfb::RhsOptions{sim->cfg.rhs_variant, true});
    sim->state = std::move(traj.final_state);
    sim->t += dt_total;
    return TDHFB_OK;
  });
}

double tdhfb_simulation_time(const tdhfb_simulation* sim) { return sim ? sim->t : 0.0; }

tdhfb_status tdhfb_simulation_observables(const tdhfb_simulation* sim, tdhfb_observables* out) {
  if (!sim || !out) return null_arg("argument");
  return guarded([&] {
    const tdhfb::DiagnosticsRow row = tdhfb::diagnostics_row(sim->t, sim->state, sim->pot, sim->cfg.monitors);
    *out = {row.t, row.particle_number, row.energy, row.tr_gamma, row.phi_l2,
            row.sobolev_phi, row.sobolev_gamma, row.sobolev_lambda};
    return TDHFB_OK;
  });
}

size_t tdhfb_simulation_grid_size(const tdhfb_simulation* sim) {
  return sim ? static_cast<size_t>(sim->state.phi.values.size()) : 0;
}

tdhfb_status tdhfb_simulation_phi(const tdhfb_simulation* sim, double* buffer, size_t length) {
  if (!sim || !buffer) return null_arg("argument");
  const auto& v = sim->state.phi.values;
  if (length < 2 * static_cast<size_t>(v.size())) {
    last_error = "phi: buffer too small";
    return TDHFB_ERR_ARGUMENT;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    buffer[2 * i] = v[i].real();
    buffer[2 * i + 1] = v[i].imag();
  }
  return TDHFB_OK;
}

}  // extern "C"
