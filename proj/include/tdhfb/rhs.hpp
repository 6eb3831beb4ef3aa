#pragma once

#include "tdhfb/model.hpp"

namespace tdhfb {

// Conjugation of the condensate term in the Gamma equation:
//   hermitian: conj(phi(x1)) phi(x2)   literal: phi(x1) phi(x2)
enum class RhsVariant { hermitian, literal };

const char* to_string(RhsVariant v);

struct RhsOptions {
  RhsVariant variant = RhsVariant::hermitian;
  // Keep the (1/N) v_N(x1 - x2) Lambda term of the Lambda equation.
  bool pair_potential = true;
};

// Time-derivative convention for every component: d/dt u = L u + n(u), where
// L is the free part and n(u) the forcing returned by the *_nonlinear calls.
//   phi:    L = i Lap,              n = i F_phi
//   Gamma:  L = -i (Lap_1 - Lap_2), n = -i G
//   Lambda: L = i (Lap_1 + Lap_2),  n = i F_Lambda - (i/N) v_N(x1 - x2) Lambda
//   sh2:    L = i (Lap_1 + Lap_2),  n = i F_sh2
// Free-propagator signatures follow: phi (+1), Gamma (-1, +1), Lambda and sh2 (+1, +1).

// (v_N * f)(x) = h^d sum_y v_N(x - y) f(y), by FFT.
Field convolve_density(const Potential& pot, const Field& f);

// F of d/dt phi = i Lap phi + i F.
Field rhs_phi(const State& st, const Potential& pot);
// G of the Gamma equation, integrals over (v_N(x1 - y) - v_N(x2 - y)).
Kernel rhs_gamma(const State& st, const Potential& pot, RhsVariant variant = RhsVariant::hermitian);
// F of d/dt Lambda = i (Lap_1 + Lap_2) Lambda - (i/N) v_N Lambda + i F.
Kernel rhs_lambda(const State& st, const Potential& pot);
// F of d/dt sh2 = i (Lap_1 + Lap_2) sh2 + i F.
Kernel rhs_sh2(const PairState& ps, const Potential& pot);

struct GmForcing {
  Eigen::VectorXcd phi;
  Eigen::MatrixXcd gamma;
  Eigen::MatrixXcd lambda;
};

struct PairForcing {
  Eigen::VectorXcd phi;
  Eigen::MatrixXcd sh2;
};

// Forcing n(u) of the GM flow, written into out (resized as needed).
void gm_nonlinear(const Eigen::VectorXcd& phi, const Eigen::MatrixXcd& gamma,
                  const Eigen::MatrixXcd& lambda, const Potential& pot, double N,
                  const RhsOptions& opts, GmForcing& out);

// Forcing n(u) of the pair flow.
void pair_nonlinear(const Eigen::VectorXcd& phi, const Eigen::MatrixXcd& sh2, const Potential& pot,
                    const PhysParams& params, PairForcing& out);

// Hartree forcing i F with F = -(v_N * |phi|^2) phi.
void hartree_nonlinear(const Eigen::VectorXcd& phi, const Potential& pot, Eigen::VectorXcd& out);

}  // namespace tdhfb
