#pragma once

#include "tdhfb/diagnostics.hpp"
#include "tdhfb/integrator.hpp"
#include "tdhfb/model.hpp"
#include "tdhfb/rhs.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tdhfb {

enum class Scenario { identities, free, hartree, full, flowcheck, fock };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct GridConfig {
  int d = 1;
  int M = 128;
  double L = 16.0;
};

struct FockConfig {
  int M_sites = 2;
  // 0 selects the smallest cutoff whose truncation tail is below 1e-8.
  int n_max = 0;
  std::vector<double> N_list{2.0, 4.0, 8.0};
  double L = 4.0;
  double beta = 0.0;
  double sigma = 0.35;
  double strength = 1.0;
  double T = 1.0;
  // Lattice condensate, rescaled so that h^d sum |phi|^2 = 1.
  std::vector<cplx> phi{{1.0, 0.0}, {0.4, 0.3}};
  // Operator form h^d k of the pair kernel (row-major, M_sites^2 entries).
  std::vector<cplx> k_hat{{0.2, 0.0}, {0.0, 0.1}, {0.0, 0.1}, {0.15, 0.0}};
};

struct IdentityConfig {
  int count = 100;
  int M = 64;
  double max_norm = 5.0;
};

struct RunConfig {
  Scenario scenario = Scenario::full;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  GridConfig grid;
  PhysParams physics;
  // N sweep for the hartree and full scenarios; empty runs physics.N only.
  std::vector<double> N_list;
  GaussianProfile potential;
  InitialConfig init;
  double T = 2.0;
  StepController time;
  // Number of equally spaced diagnostics samples over (0, T].
  int samples = 40;
  RhsVariant rhs_variant = RhsVariant::hermitian;
  MonitorConfig monitors;
  FockConfig fock;
  IdentityConfig identities;
};

// Defaults of every field, matching the documented configuration grammar.
RunConfig default_config();

// Throws Error(config) with "file:line:column: field: message" diagnostics.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_string(const std::string& text, const std::string& origin = "<string>");

// Re-checks cross-field invariants (beta range, grid, widths, time controls).
void validate(const RunConfig& cfg);

// YAML echo of the resolved configuration.
std::string to_yaml(const RunConfig& cfg);

}  // namespace tdhfb
