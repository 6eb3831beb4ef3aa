#pragma once

#include "tdhfb/grid.hpp"

#include <functional>

namespace tdhfb {

// Operator form of a kernel is A = h^d K; composition is then a plain matrix
// product and Takagi values are grid independent.

// A = U diag(sigma) U^T, U unitary, sigma descending and non-negative.
struct TakagiFactors {
  Grid grid;
  Eigen::MatrixXcd U;
  Eigen::VectorXd sigma;
};

struct HyperbolicKernels {
  Kernel sh;  // symmetric
  Kernel p;   // hermitian, ch(k) - delta
};

struct DoubleAngleKernels {
  Kernel sh2;  // symmetric, sh(2k)
  Kernel p2;   // hermitian, ch(2k) - delta
};

// Discrete delta: values I / h^d.
Kernel identity_kernel(const Grid& g);

// (A o B)(x, y) = h^d sum_z A(x, z) B(z, y).
Kernel compose(const Kernel& a, const Kernel& b);

// Throws symmetry_violation when ||K - K^T||_F > 1e-10 ||K||_F.
TakagiFactors takagi(const Kernel& k);

// Kernel of (conj(U) if conj_left else U) diag(f(sigma)) U^T.
Kernel kernel_from_factors(const TakagiFactors& tf, const std::function<double(double)>& f,
                           bool conj_left, Symmetry tag);

HyperbolicKernels hyperbolic_calculus(const TakagiFactors& tf);
DoubleAngleKernels double_angle(const TakagiFactors& tf);

// Factors of k given sh(2k): same U, sigma = asinh(mu) / 2.
TakagiFactors k_from_sh2(const Kernel& sh2);

// Kernel k itself (U diag(sigma) U^T / h^d).
Kernel kernel_of(const TakagiFactors& tf);

}  // namespace tdhfb
