#include "tdhfb/errors.hpp"
#include "tdhfb/rhs.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

using namespace tdhfb;
using namespace tdhfb::testing;

namespace {

constexpr cplx I{0.0, 1.0};

struct Setup {
  Grid g = Grid::make(1, 32, 12.0);
  PhysParams p{100.0, 0.4, 1};
  Potential pot = scale_potential({1.0, 0.7}, p, g);
};

}  // namespace

TEST_CASE("convolution by FFT matches direct summation") {
  Setup s;
  std::mt19937_64 rng(9);
  const Field f{s.g, random_vector(rng, 32)};
  CHECK(rel_err(convolve_density(s.pot, f).values, direct_convolution(s.pot, f.values)) < 1e-12);
}

TEST_CASE("GM right-hand sides match direct summation") {
  Setup s;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const State st = random_state(rng, s.g, s.p);
    CHECK(rel_err(rhs_phi(st, s.pot).values, oracle_phi(st, s.pot)) < 1e-10);
    CHECK(rel_err(rhs_gamma(st, s.pot).values, oracle_gamma(st, s.pot)) < 1e-10);
    CHECK(rel_err(rhs_gamma(st, s.pot, RhsVariant::literal).values, oracle_gamma(st, s.pot, false)) < 1e-10);
    CHECK(rel_err(rhs_lambda(st, s.pot).values, oracle_lambda(st, s.pot)) < 1e-10);

    GmForcing f;
    gm_nonlinear(st.phi.values, st.gamma.values, st.lambda.values, s.pot, s.p.N, {}, f);
    CHECK(rel_err(f.phi, Vec(I * oracle_phi(st, s.pot))) < 1e-10);
    CHECK(rel_err(f.gamma, Mat(-I * oracle_gamma(st, s.pot))) < 1e-10);
    const Mat vl = st.lambda.values.cwiseProduct(s.pot.pair.cast<cplx>());
    CHECK(rel_err(f.lambda, Mat(I * (oracle_lambda(st, s.pot) - vl / s.p.N))) < 1e-10);

    gm_nonlinear(st.phi.values, st.gamma.values, st.lambda.values, s.pot, s.p.N,
                 {RhsVariant::literal, false}, f);
    CHECK(rel_err(f.gamma, Mat(-I * oracle_gamma(st, s.pot, false))) < 1e-10);
    CHECK(rel_err(f.lambda, Mat(I * oracle_lambda(st, s.pot))) < 1e-10);
  }
}

TEST_CASE("pair right-hand side matches direct summation") {
  Setup s;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const PairState ps = random_pair_state(rng, s.g, s.p, 1.2);
    const Mat ref = oracle_sh2(ps, s.pot);
    CHECK(rel_err(rhs_sh2(ps, s.pot).values, ref) < 1e-10);
    PairForcing f;
    pair_nonlinear(ps.phi.values, ps.sh2.values, s.pot, s.p, f);
    CHECK(rel_err(f.sh2, Mat(I * ref)) < 1e-10);
    const State st = reconstruct_state(ps);
    CHECK(rel_err(f.phi, Vec(I * oracle_phi(st, s.pot))) < 1e-10);
  }
}

TEST_CASE("Hartree forcing is the k = 0 limit of the condensate forcing") {
  Setup s;
  std::mt19937_64 rng(3);
  const Vec phi = random_vector(rng, 32, 0.3);
  Vec h;
  hartree_nonlinear(phi, s.pot, h);
  const Vec ref = -I * direct_convolution(s.pot, phi.cwiseAbs2().cast<cplx>()).cwiseProduct(phi);
  CHECK(rel_err(h, ref) < 1e-12);
  const State st{{s.g, phi}, {s.g, phi.conjugate() * phi.transpose(), Symmetry::hermitian},
                 {s.g, phi * phi.transpose(), Symmetry::symmetric}, s.p};
  CHECK(rel_err(Vec(I * rhs_phi(st, s.pot).values), ref) < 1e-12);
}

TEST_CASE("rhs rejects mismatched grids") {
  Setup s;
  const Grid other = Grid::make(1, 32, 10.0);
  std::mt19937_64 rng(1);
  const State st = random_state(rng, other, s.p);
  CHECK_THROWS_AS(rhs_phi(st, s.pot), Error);
}
