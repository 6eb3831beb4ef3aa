#include "tdhfb/rhs.hpp"

#include "fft.hpp"
#include "tdhfb/errors.hpp"

namespace tdhfb {

namespace {

constexpr cplx I{0.0, 1.0};

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Vec conv(const Potential& pot, const Vec& f) {
  const Grid& g = pot.grid;
  Vec w = f;
  detail::fft_columns(g.dim(), g.points_per_axis(), w.data(), 1, detail::Direction::forward);
  w.array() *= pot.spectrum.array();
  detail::fft_columns(g.dim(), g.points_per_axis(), w.data(), 1, detail::Direction::backward);
  return w / static_cast<double>(g.size());
}

Vec density(const Mat& gamma) { return gamma.diagonal().real().cast<cplx>(); }

Vec abs2(const Vec& phi) { return phi.array().abs2().cast<cplx>(); }

// out(i, j) = (a_i + s a_j) m(i, j)
Mat row_col_scale(const Mat& m, const Vec& a, double s) {
  Mat out = m.array().colwise() * a.array();
  out.array() += s * (m.array().rowwise() * a.transpose().array());
  return out;
}

Mat masked(const Potential& pot, const Mat& k) { return k.cwiseProduct(pot.pair.cast<cplx>()); }

Vec phi_F(const Vec& phi, const Potential& pot, const Vec& vrho, const Vec& vphi2, const Mat& vg,
          const Mat& vl) {
  const double h = pot.grid.cell_volume();
  // (V o Gamma^T) phi = (V o Gamma)^T phi, V symmetric.
  Vec f = -vrho.cwiseProduct(phi) + 2.0 * vphi2.cwiseProduct(phi);
  f.noalias() -= h * (vg.transpose() * phi);
  f.noalias() -= h * (vl * phi.conjugate());
  return f;
}

// With gamma hermitian and lambda symmetric (structured = true) the commutator
// terms are A - A^dagger and the lambda terms C + C^T, halving the products.
Mat gamma_G(const Vec& phi, const Mat& gamma, const Mat& lambda, const Potential& pot, const Vec& vrho,
            const Vec& vphi2, const Mat& vg, const Mat& vl, RhsVariant variant, bool structured) {
  const double h = pot.grid.cell_volume();
  Mat g(gamma.rows(), gamma.cols());
  if (structured) {
    Mat a(gamma.rows(), gamma.cols());
    a.noalias() = vl.conjugate() * lambda;
    a.noalias() += vg * gamma;
    g = a - a.adjoint();
  } else {
    g.noalias() = vl.conjugate() * lambda;
    g.noalias() -= lambda.conjugate() * vl;
    g.noalias() += vg * gamma;
    g.noalias() -= gamma * vg;
  }
  g *= -h;
  g -= row_col_scale(gamma, vrho, -1.0);
  const Mat cond = variant == RhsVariant::hermitian ? Mat(phi.conjugate() * phi.transpose())
                                                    : Mat(phi * phi.transpose());
  g += 2.0 * row_col_scale(cond, vphi2, -1.0);
  return g;
}

Mat lambda_F(const Vec& phi, const Mat& gamma, const Mat& lambda, const Potential& pot, const Vec& vrho,
             const Vec& vphi2, const Mat& vg, const Mat& vl, bool structured) {
  const double h = pot.grid.cell_volume();
  Mat f(lambda.rows(), lambda.cols());
  f.noalias() = vl * gamma;
  f.noalias() += lambda * vg;
  if (structured) {
    f += f.transpose().eval();
  } else {
    f.noalias() += vg.conjugate() * lambda;
    f.noalias() += gamma.conjugate() * vl;
  }
  f *= -h;
  f -= row_col_scale(lambda, vrho, 1.0);
  f += 2.0 * row_col_scale(Mat(phi * phi.transpose()), vphi2, 1.0);
  return f;
}

Mat sh2_F(const Mat& sh2, const Mat& p2, const Potential& pot, const Vec& vrho, const Mat& vg,
          const Mat& vl) {
  const double h = pot.grid.cell_volume();
  Mat f(sh2.rows(), sh2.cols());
  f.noalias() = vl * p2;
  f.noalias() += sh2 * vg;
  f += f.transpose().eval();
  f *= -h;
  f -= 2.0 * vl;
  f -= row_col_scale(sh2, vrho, 1.0);
  return f;
}

// ch(2k) - delta from sh(2k): in operator form sqrt(1 + conj(S) S) - 1, S = h^d sh2.
Mat pair_p2(const Mat& sh2, double h) {
  const Mat S = h * sh2;
  Mat X(S.rows(), S.cols());
  X.noalias() = S.conjugate() * S;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (X + X.adjoint()));
  if (es.info() != Eigen::Success) fail(ErrorCode::numeric_domain, "pair flow: eigensolver failed");
  Eigen::VectorXd f = es.eigenvalues().cwiseMax(0.0);
  f = f.array() / ((1.0 + f.array()).sqrt() + 1.0);
  const Mat& W = es.eigenvectors();
  return (W * f.asDiagonal() * W.adjoint()) / h;
}

struct PairPieces {
  Mat p2, gamma, lambda;
};

PairPieces pair_pieces(const Vec& phi, const Mat& sh2, double h, double N) {
  PairPieces pp;
  pp.p2 = pair_p2(sh2, h);
  pp.gamma = phi.conjugate() * phi.transpose() + pp.p2 / (2.0 * N);
  pp.lambda = phi * phi.transpose() + sh2 / (2.0 * N);
  return pp;
}

struct Shared {
  Vec vrho, vphi2;
  Mat vg, vl;
};

Shared shared_terms(const Vec& phi, const Mat& gamma, const Mat& lambda, const Potential& pot) {
  return {conv(pot, density(gamma)), conv(pot, abs2(phi)), masked(pot, gamma), masked(pot, lambda)};
}

void check_state(const State& st, const Potential& pot, const char* what) {
  require_same_grid(st.phi.grid, pot.grid, what);
  require_same_grid(st.gamma.grid, pot.grid, what);
  require_same_grid(st.lambda.grid, pot.grid, what);
}

}  // namespace

const char* to_string(RhsVariant v) {
  return v == RhsVariant::hermitian ? "hermitian" : "literal";
}

Field convolve_density(const Potential& pot, const Field& f) {
  require_same_grid(f.grid, pot.grid, "convolve_density");
  return {f.grid, conv(pot, f.values)};
}

Field rhs_phi(const State& st, const Potential& pot) {
  check_state(st, pot, "rhs_phi");
  const Shared s = shared_terms(st.phi.values, st.gamma.values, st.lambda.values, pot);
  return {pot.grid, phi_F(st.phi.values, pot, s.vrho, s.vphi2, s.vg, s.vl)};
}

Kernel rhs_gamma(const State& st, const Potential& pot, RhsVariant variant) {
  check_state(st, pot, "rhs_gamma");
  const Shared s = shared_terms(st.phi.values, st.gamma.values, st.lambda.values, pot);
  return {pot.grid,
          gamma_G(st.phi.values, st.gamma.values, st.lambda.values, pot, s.vrho, s.vphi2, s.vg, s.vl, variant,
                  false),
          Symmetry::none};
}

Kernel rhs_lambda(const State& st, const Potential& pot) {
  check_state(st, pot, "rhs_lambda");
  const Shared s = shared_terms(st.phi.values, st.gamma.values, st.lambda.values, pot);
  return {pot.grid,
          lambda_F(st.phi.values, st.gamma.values, st.lambda.values, pot, s.vrho, s.vphi2, s.vg, s.vl, false),
          Symmetry::symmetric};
}

Kernel rhs_sh2(const PairState& ps, const Potential& pot) {
  require_same_grid(ps.phi.grid, pot.grid, "rhs_sh2");
  require_same_grid(ps.sh2.grid, pot.grid, "rhs_sh2");
  const PairPieces pp = pair_pieces(ps.phi.values, ps.sh2.values, pot.grid.cell_volume(), ps.params.N);
  const Shared s = shared_terms(ps.phi.values, pp.gamma, pp.lambda, pot);
  return {pot.grid, sh2_F(ps.sh2.values, pp.p2, pot, s.vrho, s.vg, s.vl), Symmetry::symmetric};
}

void gm_nonlinear(const Vec& phi, const Mat& gamma, const Mat& lambda, const Potential& pot, double N,
                  const RhsOptions& opts, GmForcing& out) {
  const Shared s = shared_terms(phi, gamma, lambda, pot);
  const bool structured = opts.variant == RhsVariant::hermitian;
  out.phi = I * phi_F(phi, pot, s.vrho, s.vphi2, s.vg, s.vl);
  out.gamma = -I * gamma_G(phi, gamma, lambda, pot, s.vrho, s.vphi2, s.vg, s.vl, opts.variant, structured);
  out.lambda = lambda_F(phi, gamma, lambda, pot, s.vrho, s.vphi2, s.vg, s.vl, structured);
  if (opts.pair_potential) out.lambda -= s.vl / N;
  out.lambda *= I;
}

void pair_nonlinear(const Vec& phi, const Mat& sh2, const Potential& pot, const PhysParams& params,
                    PairForcing& out) {
  const PairPieces pp = pair_pieces(phi, sh2, pot.grid.cell_volume(), params.N);
  const Shared s = shared_terms(phi, pp.gamma, pp.lambda, pot);
  out.phi = I * phi_F(phi, pot, s.vrho, s.vphi2, s.vg, s.vl);
  out.sh2 = I * sh2_F(sh2, pp.p2, pot, s.vrho, s.vg, s.vl);
}

void hartree_nonlinear(const Vec& phi, const Potential& pot, Vec& out) {
  out = -I * conv(pot, abs2(phi)).cwiseProduct(phi);
}

}  // namespace tdhfb
