#include "tdhfb/errors.hpp"
#include "tdhfb/integrator.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace tdhfb;
using namespace tdhfb::testing;

namespace {

double state_diff(const State& a, const State& b) {
  const double num = (a.phi.values - b.phi.values).squaredNorm() + (a.gamma.values - b.gamma.values).squaredNorm() +
                     (a.lambda.values - b.lambda.values).squaredNorm();
  const double den = b.phi.values.squaredNorm() + b.gamma.values.squaredNorm() + b.lambda.values.squaredNorm();
  return std::sqrt(num / den);
}

struct Small {
  Grid g = Grid::make(1, 32, 10.0);
  PhysParams p{50.0, 0.3, 1};
  Potential pot = scale_potential({1.0, 1.0}, p, g);
  State st;
  Small() {
    InitialConfig ic;
    ic.phi.width = 1.0;
    ic.k.amp = 0.4;
    st = reconstruct_state(initial_data(g, p, ic));
  }
};

}  // namespace

TEST_CASE("uniform samples") {
  const auto s = uniform_samples(2.0, 4);
  REQUIRE(s.size() == 4);
  CHECK(s.front() == doctest::Approx(0.5));
  CHECK(s.back() == 2.0);
  CHECK_THROWS_AS(uniform_samples(1.0, 0), Error);
}

TEST_CASE("free flow is exact") {
  const Grid g = Grid::make(1, 32, 8.0);
  const PhysParams p{10.0, 0.4, 1};
  const Potential pot = scale_potential({1.0, 0.0}, p, g);
  std::mt19937_64 rng(6);
  const State st = random_state(rng, g, p);
  StepController ctl;
  ctl.adaptive = false;
  ctl.dt = 0.1;
  const auto traj = evolve(st, pot, 1.0, ctl, {1.0}, nullptr);
  State ex = st;
  ex.phi = free_propagator(st.phi, 1.0, 1);
  ex.gamma = free_propagator(st.gamma, 1.0, -1, 1);
  ex.lambda = free_propagator(st.lambda, 1.0, 1, 1);
  CHECK(state_diff(traj.final_state, ex) < 1e-12);
  CHECK(traj.accepted == 10);
}

TEST_CASE("Lawson and classical RK4 agree at small steps") {
  Small s;
  const State a = step(s.st, s.pot, 1e-3, Scheme::lawson_rk4);
  State b = s.st;
  for (int k = 0; k < 4; ++k) b = step(b, s.pot, 2.5e-4, Scheme::rk4);
  CHECK(state_diff(a, b) < 1e-9);
}

TEST_CASE("adaptive evolution is deterministic and samples the requested times") {
  Small s;
  StepController ctl;
  ctl.rtol = 1e-9;
  Monitor<State> mon = [&](double t, const State& st, const StepStats&) {
    DiagnosticsRow r;
    r.t = t;
    r.particle_number = particle_number(st);
    return r;
  };
  const auto a = evolve(s.st, s.pot, 0.3, ctl, uniform_samples(0.3, 3), mon);
  const auto b = evolve(s.st, s.pot, 0.3, ctl, uniform_samples(0.3, 3), mon);
  REQUIRE(a.times.size() == 4);
  CHECK(a.times[2] == doctest::Approx(0.2));
  CHECK(state_diff(a.final_state, b.final_state) == 0.0);
  CHECK(a.rows.back().particle_number == doctest::Approx(a.rows.front().particle_number).epsilon(1e-10));
}

TEST_CASE("GM flow preserves hermiticity and symmetry") {
  Small s;
  StepController ctl;
  const auto traj = evolve(s.st, s.pot, 0.2, ctl, {0.2}, nullptr);
  CHECK(hermiticity_residual(traj.final_state.gamma.values) < 1e-12);
  CHECK(symmetry_residual(traj.final_state.lambda.values) < 1e-12);
}

TEST_CASE("step size collapse raises a stiffness error") {
  Small s;
  StepController ctl;
  ctl.rtol = 1e-30;
  ctl.dt = 1e-2;
  ctl.min_dt = 1e-3;
  try {
    evolve(s.st, s.pot, 0.1, ctl, {0.1}, nullptr);
    FAIL("expected stiffness");
  } catch (const IntegrationError& e) {
    CHECK(e.code() == ErrorCode::stiffness);
    CHECK(e.time() == 0.0);
  }
}

TEST_CASE("fixed-step Lawson RK4 is fourth order") {
  Small s;
  StepController ctl;
  ctl.adaptive = false;
  std::vector<State> out;
  for (double dt : {0.02, 0.01, 0.005}) {
    ctl.dt = dt;
    out.push_back(evolve(s.st, s.pot, 0.4, ctl, {0.4}, nullptr).final_state);
  }
  const double order = std::log2(state_diff(out[0], out[1]) / state_diff(out[1], out[2]));
  CHECK(order > 3.7);
}

TEST_CASE("Hartree evolution keeps the L2 norm") {
  Small s;
  StepController ctl;
  const auto phis = evolve_hartree(s.st.phi, s.pot, ctl, {0.25, 0.5});
  REQUIRE(phis.size() == 2);
  CHECK(l2_norm(phis[1]) == doctest::Approx(l2_norm(s.st.phi)).epsilon(1e-10));
}

TEST_CASE("controller validation") {
  StepController c;
  c.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.min_dt = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}
