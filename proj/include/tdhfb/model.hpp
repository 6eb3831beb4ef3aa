#pragma once

#include "tdhfb/grid.hpp"
#include "tdhfb/kernel_algebra.hpp"

namespace tdhfb {

struct PhysParams {
  double N = 100.0;
  double beta = 0.4;
  int dim = 1;

  // 1 / (2 (1 + 8 beta))
  double epsilon() const { return 0.5 / (1.0 + 8.0 * beta); }
  // Sobolev order 1/2 + epsilon of the norm monitors.
  double sobolev_order() const { return 0.5 + epsilon(); }

  // Throws argument errors for N <= 0, beta outside [0, 2/3), dim not 1 or 2.
  void validate() const;
};

// v(x) = strength * exp(-|x|^2 / (2 sigma^2)).
struct GaussianProfile {
  double sigma = 1.0;
  double strength = 1.0;

  double operator()(double r2) const;
  double integral(int dim) const;
};

struct Potential {
  Grid grid;
  GaussianProfile profile;
  double scale = 1.0;  // N^beta
  double amplitude = 1.0;  // N^{d beta}
  // v_N at displacement index q (periodized), q as in Grid::difference_index.
  Eigen::VectorXd samples;
  // V(i, j) = v_N(x_i - x_j).
  Eigen::MatrixXd pair;
  // h^d * FFT(samples); convolution is inverse-FFT(spectrum * FFT(f)).
  Eigen::VectorXcd spectrum;
  // Largest periodic-image correction relative to the peak.
  double wrap_correction = 0.0;

  double integral() const { return profile.integral(grid.dim()); }
  bool is_zero() const { return profile.strength == 0.0; }
};

// Samples N^{d beta} v(N^beta x) on the periodic grid; values below 1e-40 of
// the peak are flushed to zero.
Potential scale_potential(const GaussianProfile& profile, const PhysParams& params, const Grid& grid);

struct State {
  Field phi;
  Kernel gamma;   // hermitian
  Kernel lambda;  // symmetric
  PhysParams params;
};

struct PairState {
  Field phi;
  Kernel sh2;  // symmetric
  PhysParams params;
};

// State plus the pair data it was built from.
struct Reconstruction {
  State state;
  TakagiFactors k;
  Kernel shbar_sh;  // conj(sh(k)) o sh(k), hermitian
};

Reconstruction reconstruct(const PairState& ps);
State reconstruct_state(const PairState& ps);

struct PhiInit {
  double amp = 1.0;
  double center = 0.0;    // every axis
  double width = 1.0;
  double momentum = 0.0;  // along axis 0
};

struct KInit {
  double amp = 0.3;
  double width_rel = 0.5;
  double width_com = 1.0;
};

struct InitialConfig {
  PhiInit phi;
  KInit k;
};

// Pair excitation kernel k0 of the initial family (symmetric).
Kernel initial_pair_kernel(const Grid& g, const InitialConfig& cfg);

// Gaussian phi0 and k0; phi0 is rescaled so that the particle number equals N.
PairState initial_data(const Grid& g, const PhysParams& params, const InitialConfig& cfg);

}  // namespace tdhfb
