#include "tdhfb/diagnostics.hpp"
#include "tdhfb/errors.hpp"
#include "tdhfb/model.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace tdhfb;
using namespace tdhfb::testing;

TEST_CASE("beta range is enforced") {
  PhysParams p;
  p.beta = 0.7;
  try {
    p.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("beta must lie in [0, 2/3)") != std::string::npos);
  }
  p.beta = 0.5;
  CHECK_NOTHROW(p.validate());
  CHECK(p.epsilon() == doctest::Approx(0.1));
  p.N = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("scaled potential keeps its integral") {
  const Grid g = Grid::make(1, 256, 16.0);
  const PhysParams p{100.0, 0.4, 1};
  const GaussianProfile prof{1.0, 0.8};
  const Potential pot = scale_potential(prof, p, g);
  CHECK(pot.scale == doctest::Approx(std::pow(100.0, 0.4)));
  CHECK(g.cell_volume() * pot.samples.sum() == doctest::Approx(prof.integral(1)).epsilon(1e-10));
  CHECK(pot.samples[0] == doctest::Approx(pot.amplitude * 0.8));
  CHECK((pot.pair - pot.pair.transpose()).norm() == 0.0);
  CHECK(pot.spectrum[0].real() == doctest::Approx(prof.integral(1)).epsilon(1e-10));
}

TEST_CASE("wide potential on a small box is rejected") {
  const Grid g = Grid::make(1, 32, 4.0);
  try {
    scale_potential({2.0, 1.0}, {100.0, 0.0, 1}, g);
    FAIL("expected domain_too_small");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain_too_small);
  }
}

TEST_CASE("initial data carries N particles") {
  const Grid g = Grid::make(1, 64, 16.0);
  const PhysParams p{50.0, 0.4, 1};
  InitialConfig ic;
  ic.k.amp = 0.4;
  const PairState ps = initial_data(g, p, ic);
  CHECK(particle_number(ps) == doctest::Approx(50.0).epsilon(1e-12));
  const State st = reconstruct_state(ps);
  CHECK(particle_number(st) == doctest::Approx(50.0).epsilon(1e-10));
  CHECK(hermiticity_residual(st.gamma.values) < 1e-13);
  CHECK(symmetry_residual(st.lambda.values) < 1e-13);
  // Gamma - conj(phi) phi is positive semidefinite.
  const Mat pair = st.gamma.values - st.phi.values.conjugate() * st.phi.values.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pair + pair.adjoint()));
  CHECK(es.eigenvalues().minCoeff() > -1e-12);

  ic.phi.width = 3.0;
  CHECK_THROWS_AS(initial_data(g, p, ic), Error);
}

TEST_CASE("reconstruction matches the defining compositions") {
  const Grid g = Grid::make(1, 32, 8.0);
  const PhysParams p{20.0, 0.3, 1};
  std::mt19937_64 rng(4);
  const PairState ps = random_pair_state(rng, g, p, 0.8);
  const Reconstruction r = reconstruct(ps);
  const HyperbolicKernels hk = hyperbolic_calculus(r.k);
  Kernel shbar = hk.sh;
  shbar.values = hk.sh.values.conjugate();
  const Mat gamma = ps.phi.values.conjugate() * ps.phi.values.transpose() + compose(shbar, hk.sh).values / p.N;
  const Mat lambda = ps.phi.values * ps.phi.values.transpose() + ps.sh2.values / (2.0 * p.N);
  CHECK(rel_err(r.state.gamma.values, gamma) < 1e-12);
  CHECK(rel_err(r.state.lambda.values, lambda) < 1e-14);
  // Lambda - phi phi = sh o ch / N
  Kernel ch = hk.p;
  ch.values += identity_kernel(g).values;
  CHECK(rel_err(Mat(r.state.lambda.values - ps.phi.values * ps.phi.values.transpose()),
                Mat(compose(hk.sh, ch).values / p.N)) < 1e-12);
}
