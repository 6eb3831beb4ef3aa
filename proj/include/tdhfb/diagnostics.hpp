#pragma once

#include "tdhfb/model.hpp"

#include <limits>
#include <string>
#include <vector>

namespace tdhfb {

struct MonitorConfig {
  // Sobolev order; negative selects 1/2 + epsilon from PhysParams.
  double sobolev_order = -1.0;
  int stride = 1;
  // Lebesgue exponent q of the L^2_t L^q_x condensate monitor.
  double lebesgue_exponent = std::numeric_limits<double>::infinity();
  double fit_t_min = 1.0;
  double fit_t_max = std::numeric_limits<double>::infinity();
  double drift_threshold = 1e-6;
  bool energy = true;

  double order(const PhysParams& p) const { return sobolev_order < 0.0 ? p.sobolev_order() : sobolev_order; }
};

// Columns in CSV order; the last three are extras beyond the core monitor set.
struct DiagnosticsRow {
  double t = 0.0;
  double particle_number = 0.0;
  double energy = 0.0;
  double tr_gamma = 0.0;
  double phi_l2 = 0.0;
  double sobolev_phi = 0.0;
  double sobolev_gamma = 0.0;
  double sobolev_lambda = 0.0;
  double diag_shift_lambda = 0.0;
  double grad2_lambda = 0.0;  // ||grad_x grad_y Lambda|| * N^{-4 beta}
  double hermiticity_residual = 0.0;
  double symmetry_residual = 0.0;
  double dt_used = 0.0;
  double step_error_estimate = 0.0;
  double phi_lq = 0.0;
  double cum_phi_lq_sq = 0.0;         // int_0^t ||phi||_{L^q}^2
  double cum_diag_shift_lambda_sq = 0.0;  // int_0^t diag_shift_lambda^2

  static const std::vector<std::string>& columns();
  std::vector<double> values() const;
};

double particle_number(const PairState& ps);
double particle_number(const State& st);

// Expectation of the Hamiltonian in the quasi-free state, from (phi, sh(k)):
//   N { ||grad phi||^2 + (1/2N) ||grad_{x,y} sh||^2
//       + (1/2N) int v_N(x-y) |phi(x) sh(y,z) + phi(y) sh(x,z)|^2
//       + (1/2) int v_N(x-y) [|Lambda|^2 + |Gamma_p|^2 + rho_p(x) rho_p(y)] }
// with Gamma_p = conj(sh) o sh / N. The triple integral is a direct sum.
double energy(const PairState& ps, const Potential& pot);
// Same functional from (phi, Gamma, Lambda) via the Wick expansion.
double energy(const State& st, const Potential& pot);
// Interaction weights as printed in the source (1/4)[2|Lambda|^2 + |Gamma|^2 + rho rho];
// not conserved by the flow, kept for comparison.
double energy_printed_form(const PairState& ps, const Potential& pot);

// Fills the Sobolev, shift, residual and L^q entries of a row.
void norm_monitors(const State& st, const MonitorConfig& cfg, DiagnosticsRow& row);

// max over grid shifts z of ||<grad>^s Lambda(x + z, x)||_{L^2(dx)}.
double diag_shift_norm(const Kernel& lambda, double s);
// L^q norm of a field (q = infinity allowed).
double lebesgue_norm(const Field& f, double q);

// Complete row for a GM state (energy from the State route).
DiagnosticsRow diagnostics_row(double t, const State& st, const Potential& pot, const MonitorConfig& cfg);
// Complete row for a pair state (energy from the pair route).
DiagnosticsRow diagnostics_row(double t, const PairState& ps, const Potential& pot, const MonitorConfig& cfg);

// Trapezoid accumulation of the cumulative columns, in time order.
void accumulate_time_integrals(std::vector<DiagnosticsRow>& rows);

struct GrowthFit {
  double exponent = 0.0;
  double std_error = 0.0;
  double prefactor = 0.0;
  int samples = 0;
};

// Least-squares slope of log(value) against log(t) over [t_min, t_max].
GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& value, double t_min,
                     double t_max);

struct DriftReport {
  double number_drift = 0.0;
  double energy_drift = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

DriftReport drift_report(const std::vector<DiagnosticsRow>& rows, double threshold);

}  // namespace tdhfb
