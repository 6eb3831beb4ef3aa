#include "tdhfb/kernel_algebra.hpp"

#include "tdhfb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tdhfb {

namespace {

constexpr double kSymmetryTol = 1e-10;
// Takagi values below this fraction of the largest are treated as zero.
constexpr double kRankTol = 1e-13;

void check_symmetric(const Kernel& k, const char* what) {
  const double r = symmetry_residual(k.values);
  if (r > kSymmetryTol)
    fail(ErrorCode::symmetry_violation,
         std::string(what) + ": kernel is not symmetric (relative residual " + std::to_string(r) + ")");
}

// Modified Gram-Schmidt, two passes. Keeps each column's phase so that the
// products u u^T are unchanged up to the orthogonalization correction.
void orthonormalize(Eigen::MatrixXcd& q) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < q.cols(); ++j) {
      for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
      q.col(j).normalize();
    }
  }
}

// Factor the operator-form matrix a (complex symmetric).
void takagi_operator(const Eigen::MatrixXcd& a, Eigen::MatrixXcd& U, Eigen::VectorXd& sigma) {
  const Index n = a.rows();
  const Eigen::MatrixXcd as = 0.5 * (a + a.transpose());
  Eigen::MatrixXd s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = as.real();
  s.topRightCorner(n, n) = as.imag();
  s.bottomLeftCorner(n, n) = as.imag();
  s.bottomRightCorner(n, n) = -as.real();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) fail(ErrorCode::numeric_domain, "takagi: eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = std::max(ev[2 * n - 1], 0.0);

  // Eigenvalues come in +/- pairs; the positive half carries the Takagi data.
  Index kept = 0;
  while (kept < n && ev[2 * n - 1 - kept] > kRankTol * top && top > 0.0) ++kept;

  Eigen::MatrixXcd q(n, kept);
  sigma.setZero(n);
  for (Index j = 0; j < kept; ++j) {
    const Index c = 2 * n - 1 - j;
    sigma[j] = ev[c];
    q.col(j).real() = es.eigenvectors().col(c).head(n);
    q.col(j).imag() = es.eigenvectors().col(c).tail(n);
  }
  orthonormalize(q);
  // Near-zero pairs can mix u with i u; u^dagger A conj(u) must be real positive.
  if (kept > 0) {
    const Eigen::MatrixXcd aq = as * q.conjugate();
    for (Index j = 0; j < kept; ++j) {
      const cplx r = q.col(j).dot(aq.col(j));
      if (std::abs(r) > 0.0) q.col(j) *= std::polar(1.0, 0.5 * std::arg(r));
    }
  }

  U.resize(n, n);
  U.leftCols(kept) = q;
  if (kept < n) {
    if (kept == 0) {
      U.setIdentity();
    } else {
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(q);
      const Eigen::MatrixXcd full = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
      U.rightCols(n - kept) = full.rightCols(n - kept);
    }
  }
}

Eigen::MatrixXcd factor_product(const TakagiFactors& tf, const Eigen::VectorXd& d, bool conj_left) {
  const Eigen::MatrixXcd left = conj_left ? Eigen::MatrixXcd(tf.U.conjugate()) : tf.U;
  return (left * d.asDiagonal()) * tf.U.transpose();
}

Kernel to_kernel(const Grid& g, Eigen::MatrixXcd op, Symmetry tag) {
  op /= g.cell_volume();
  if (tag == Symmetry::symmetric) op = 0.5 * (op + op.transpose()).eval();
  if (tag == Symmetry::hermitian) op = 0.5 * (op + op.adjoint()).eval();
  return {g, std::move(op), tag};
}

}  // namespace

Kernel identity_kernel(const Grid& g) {
  return {g, Eigen::MatrixXcd::Identity(g.size(), g.size()) / g.cell_volume(), Symmetry::symmetric};
}

Kernel compose(const Kernel& a, const Kernel& b) {
  if (a.grid != b.grid) fail(ErrorCode::argument, "compose: kernels live on different grids");
  Kernel out{a.grid, Eigen::MatrixXcd(a.values.rows(), b.values.cols()), Symmetry::none};
  out.values.noalias() = a.values * b.values;
  out.values *= a.grid.cell_volume();
  return out;
}

TakagiFactors takagi(const Kernel& k) {
  check_symmetric(k, "takagi");
  TakagiFactors tf{k.grid, {}, {}};
  takagi_operator(k.grid.cell_volume() * k.values, tf.U, tf.sigma);
  return tf;
}

Kernel kernel_from_factors(const TakagiFactors& tf, const std::function<double(double)>& f,
                           bool conj_left, Symmetry tag) {
  const Eigen::VectorXd d = tf.sigma.unaryExpr(f);
  return to_kernel(tf.grid, factor_product(tf, d, conj_left), tag);
}

HyperbolicKernels hyperbolic_calculus(const TakagiFactors& tf) {
  const Eigen::VectorXd s = tf.sigma.array().sinh();
  // cosh(x) - 1 = 2 sinh^2(x / 2) avoids cancellation for small x.
  const Eigen::VectorXd c = 2.0 * (0.5 * tf.sigma.array()).sinh().square();
  return {to_kernel(tf.grid, factor_product(tf, s, false), Symmetry::symmetric),
          to_kernel(tf.grid, factor_product(tf, c, true), Symmetry::hermitian)};
}

DoubleAngleKernels double_angle(const TakagiFactors& tf) {
  const Eigen::VectorXd s = (2.0 * tf.sigma.array()).sinh();
  const Eigen::VectorXd c = 2.0 * tf.sigma.array().sinh().square();
  return {to_kernel(tf.grid, factor_product(tf, s, false), Symmetry::symmetric),
          to_kernel(tf.grid, factor_product(tf, c, true), Symmetry::hermitian)};
}

TakagiFactors k_from_sh2(const Kernel& sh2) {
  TakagiFactors tf = takagi(sh2);
  tf.sigma = 0.5 * tf.sigma.array().asinh();
  return tf;
}

Kernel kernel_of(const TakagiFactors& tf) {
  return to_kernel(tf.grid, factor_product(tf, tf.sigma, false), Symmetry::symmetric);
}

}  // namespace tdhfb
