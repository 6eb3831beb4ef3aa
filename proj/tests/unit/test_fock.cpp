#include "tdhfb/errors.hpp"
#include "tdhfb/fock.hpp"
#include "tdhfb/diagnostics.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace tdhfb;
using namespace tdhfb::testing;

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Grid lattice(int M = 2, double L = 4.0) { return Grid::make(1, M, L, LaplacianKind::lattice); }

}  // namespace

TEST_CASE("basis enumeration") {
  for (int M : {1, 2, 3})
    for (int n : {0, 3, 6}) {
      const auto b = FockBasis::make(M, n);
      CHECK(b->dimension() == static_cast<Index>(binom(n + M, M)));
      for (Index i = 0; i < b->dimension(); ++i) CHECK(b->index_of(b->occupation(i)) == i);
    }
  const auto b = FockBasis::make(2, 2);
  CHECK(b->index_of({1, 1}) >= 0);
  CHECK(b->index_of({2, 1}) == -1);
  CHECK(b->sector_size(2) == 3);
}

TEST_CASE("ladder operators and CCR") {
  const auto b = FockBasis::make(2, 5);
  const LadderOps ops = ladder_ops(b);
  Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(b->dimension());
  vac[0] = 1.0;
  CHECK((ops.a[0].matrix * vac).norm() == 0.0);
  const Eigen::VectorXcd one = ops.adag[1].matrix * vac;
  CHECK(one[b->index_of({0, 1})] == cplx(1.0));
  CHECK(one.norm() == doctest::Approx(1.0));

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Eigen::MatrixXcd c =
          ops.a[i].matrix * ops.adag[j].matrix - ops.adag[j].matrix * ops.a[i].matrix;
      for (Index s = 0; s < b->dimension(); ++s) {
        if (b->sector(s) >= 5) continue;
        for (Index r = 0; r < b->dimension(); ++r) {
          if (b->sector(r) >= 5) continue;
          const cplx expect = (i == j && r == s) ? 1.0 : 0.0;
          CHECK(std::abs(c(r, s) - expect) < 1e-13);
        }
      }
    }
}

TEST_CASE("Hamiltonian: one-particle sector and hand-enumerated two-particle sector") {
  const Grid g = lattice();
  const PhysParams p{4.0, 0.0, 1};
  const auto b = FockBasis::make(2, 2);

  const Potential free_pot = scale_potential({0.35, 0.0}, p, g);
  const FockOperator H0 = hamiltonian(b, free_pot, p);
  const Eigen::MatrixXd D = laplacian_matrix(g);
  const Index s1 = b->sector_begin(1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Index r = b->index_of({i == 0 ? 1 : 0, i == 1 ? 1 : 0});
      const Index c = b->index_of({j == 0 ? 1 : 0, j == 1 ? 1 : 0});
      CHECK(r >= s1);
      CHECK(H0.matrix(r, c).real() == doctest::Approx(D(i, j)));
    }

  const Potential pot = scale_potential({0.35, 1.0}, p, g);
  const FockOperator H = hamiltonian(b, pot, p);
  CHECK((H.matrix - H.matrix.adjoint()).norm() == 0.0);
  // Sector with two particles: |2,0>, |1,1>, |0,2>.
  const double v0 = pot.pair(0, 0), v1 = pot.pair(0, 1);
  const double hop = D(0, 1), on = D(0, 0);
  const Index s20 = b->index_of({2, 0}), s11 = b->index_of({1, 1}), s02 = b->index_of({0, 2});
  CHECK(H.matrix(s20, s20).real() == doctest::Approx(2.0 * on - v0 * 2.0 / (2.0 * p.N)));
  CHECK(H.matrix(s11, s11).real() == doctest::Approx(2.0 * on - 2.0 * v1 / (2.0 * p.N)));
  CHECK(H.matrix(s02, s02).real() == doctest::Approx(2.0 * on - v0 * 2.0 / (2.0 * p.N)));
  CHECK(H.matrix(s11, s20).real() == doctest::Approx(std::sqrt(2.0) * hop));
  CHECK(H.matrix(s02, s11).real() == doctest::Approx(std::sqrt(2.0) * hop));
  CHECK(std::abs(H.matrix(s02, s20)) == 0.0);
}

TEST_CASE("coherent state preparation") {
  const Grid g = lattice();
  const auto b = FockBasis::make(2, 40);
  const double N = 4.0;
  Field phi = Field::zeros(g);
  phi.values[0] = cplx(0.3, 0.2);
  const FockVector psi = prepare(b, phi, Kernel::zeros(g, Symmetry::symmetric), N);
  const double mean = N * g.cell_volume() * std::norm(phi.values[0]);
  for (int n = 0; n < 10; ++n) {
    const double poisson = std::exp(-mean) * std::pow(mean, n) / std::tgamma(n + 1.0);
    CHECK(std::norm(psi.amplitudes[b->index_of({n, 0})]) == doctest::Approx(poisson).epsilon(1e-12));
  }
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-13));

  const FockVector vac = prepare(b, Field::zeros(g), Kernel::zeros(g, Symmetry::symmetric), N);
  CHECK(std::abs(vac.amplitudes[0] - 1.0) == 0.0);
  const Marginals m = marginals(vac, g, N);
  CHECK(m.l01.values.norm() == 0.0);
  CHECK(m.l11.values.norm() == 0.0);
}

TEST_CASE("prepared marginals match the quasi-free state") {
  const Grid g = lattice();
  const double N = 3.0;
  const auto b = FockBasis::make(2, 40);
  Field phi = Field::zeros(g);
  phi.values << 0.4, cplx(0.2, 0.1);
  Kernel k = Kernel::zeros(g, Symmetry::symmetric);
  k.values << 0.1, cplx(0.0, 0.05), cplx(0.0, 0.05), 0.08;
  const FockVector psi = prepare(b, phi, k, N);
  const State st = reconstruct_state({phi, double_angle(takagi(k)).sh2, {N, 0.0, 1}});
  const Marginals m = marginals(psi, g, N);
  CHECK(rel_err(m.l01.values, st.phi.values) < 1e-10);
  CHECK(rel_err(m.l11.values, st.gamma.values) < 1e-10);
  CHECK(rel_err(m.l02.values, st.lambda.values) < 1e-10);
  // <N> = N (||phi||^2 + sum sinh^2 / N)
  CHECK(N * g.cell_volume() * m.l11.values.trace().real() == doctest::Approx(particle_number(
                                                                    PairState{phi, double_angle(takagi(k)).sh2,
                                                                              {N, 0.0, 1}})));
}

TEST_CASE("truncation is detected") {
  const Grid g = lattice();
  Field phi = Field::zeros(g);
  phi.values << 0.5, 0.5;
  try {
    prepare(FockBasis::make(2, 4), phi, Kernel::zeros(g, Symmetry::symmetric), 8.0);
    FAIL("expected truncation_insufficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::truncation_insufficient);
  }
}

TEST_CASE("exact evolution is unitary and conserves N and H") {
  const Grid g = lattice();
  const PhysParams p{4.0, 0.0, 1};
  const auto b = FockBasis::make(2, 30);
  const Potential pot = scale_potential({0.35, 1.0}, p, g);
  Field phi = Field::zeros(g);
  phi.values << 0.4, cplx(0.2, 0.3);
  Kernel k = Kernel::zeros(g, Symmetry::symmetric);
  k.values << 0.05, 0.02, 0.02, 0.04;
  const FockVector psi = prepare(b, phi, k, p.N);
  const FockOperator H = hamiltonian(b, pot, p);
  const ExactPropagator prop(H);
  const FockVector out = prop.evolve(psi, 1.3);
  CHECK(std::abs(out.norm() - psi.norm()) < 1e-12);
  CHECK(std::abs(expectation(H, out) - expectation(H, psi)) < 1e-10);
  const double n0 = marginals(psi, g, p.N).l11.values.trace().real();
  const double n1 = marginals(out, g, p.N).l11.values.trace().real();
  CHECK(std::abs(n1 - n0) < 1e-10);
  // Evolution matches the matrix exponential exp(i t H).
  Eigen::SparseMatrix<cplx> G = (cplx(0.0, 1.3) * H.matrix).sparseView();
  const Eigen::VectorXcd ref = expm_action(G, psi.amplitudes);
  CHECK((ref - out.amplitudes).norm() < 1e-10);
}

TEST_CASE("phase-optimized distance") {
  const auto b = FockBasis::make(1, 3);
  FockVector a{b, Eigen::VectorXcd::Zero(4)}, c{b, Eigen::VectorXcd::Zero(4)};
  a.amplitudes[0] = 1.0;
  c.amplitudes[0] = std::polar(1.0, 0.7);
  CHECK(phase_opt_distance(a, c) < 1e-15);
  c.amplitudes.setZero();
  c.amplitudes[1] = 1.0;
  CHECK(phase_opt_distance(a, c) == doctest::Approx(std::sqrt(2.0)));
  c.amplitudes[0] = 0.6;
  c.amplitudes[1] = 0.8;
  CHECK(phase_opt_distance(a, c) == doctest::Approx(std::sqrt(2.0 - 1.2)));
}
