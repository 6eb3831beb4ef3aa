// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "tdhfb/config.hpp"
#include "tdhfb/errors.hpp"
#include "tdhfb/runner.hpp"

#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace tdhfb;
using namespace tdhfb::testing;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

RunConfig load(const char* name) { return parse_config_file(std::string(TDHFB_CONFIG_DIR) + "/" + name); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double full_drift(const RunConfig& cfg) {
  const ScenarioReport r = run_full(cfg);
  return std::max(r.metric("number_drift"), r.metric("energy_drift"));
}

Outcome identities() {
  const ScenarioReport r = run_identities(load("identities.yaml"));
  const double worst = std::max(r.metric("max_id_shsh_pp"), r.metric("max_id_sh2"));
  return {r.metric("kernels_passed") == 100.0 && worst <= 1e-10,
          fmt("%g/100 kernels, max identity residual %.3g (tol 1e-10)", r.metric("kernels_passed"), worst)};
}

Outcome conservation() {
  RunConfig cfg = load("full.yaml");
  const ScenarioReport r = run_full(cfg);
  const double nd = r.metric("number_drift"), ed = r.metric("energy_drift");

  // dt halving with fixed steps.
  cfg.time.adaptive = false;
  cfg.time.dt = 0.01;
  const double coarse = full_drift(cfg);
  cfg.time.dt = 0.005;
  const double fine = full_drift(cfg);
  const double ratio = coarse / fine;
  return {nd <= 1e-6 && ed <= 1e-6 && ratio >= 8.0,
          fmt("number drift %.3g, energy drift %.3g (tol 1e-6)", nd, ed) +
              fmt("; fixed dt 0.01 -> 0.005 drift %.3g -> %.3g, reduction %.3gx (need >= 8)", coarse, fine, ratio)};
}

Outcome flowcheck() {
  const ScenarioReport r = run_flowcheck(load("flowcheck.yaml"));
  const double d = r.metric("flow_divergence");
  return {d <= 1e-6, fmt("max relative divergence %.3g (tol 1e-6)", d)};
}

Outcome free_flow() {
  const ScenarioReport r = run_free(load("free.yaml"));
  const double e = r.metric("free_max_error");
  return {e <= 1e-10, fmt("max relative error vs closed form %.3g (tol 1e-10)", e)};
}

ScenarioReport hartree_report;

Outcome hartree() {
  hartree_report = run_hartree(load("hartree.yaml"));
  const ScenarioReport& r = hartree_report;
  const double e2 = r.metric("sup_phi_error_t1_N100"), e3 = r.metric("sup_phi_error_t1_N1000"),
               e4 = r.metric("sup_phi_error_t1_N10000");
  return {e2 > e3 && e3 > e4 && e4 <= 1e-2,
          fmt("sup_{t<=1} error N=1e2 %.3g, 1e3 %.3g, 1e4 %.3g (strictly decreasing, last <= 1e-2)", e2, e3, e4)};
}

Outcome uniformity() {
  const ScenarioReport& r = hartree_report;
  if (r.metrics.empty()) return {false, "hartree sweep unavailable"};
  const double vp = r.metric("sobolev_phi_variation"), vg = r.metric("sobolev_gamma_variation");
  return {vp < 0.1 && vg < 0.1, fmt("variation of max sobolev_phi %.3g, sobolev_gamma %.3g (tol 0.1)", vp, vg)};
}

Outcome growth() {
  const RunConfig cfg = load("growth.yaml");
  const ScenarioReport r = run_full(cfg);
  const double a = r.metric("growth_exponent");
  const double ref = 1.0 / (1.0 + 8.0 * cfg.physics.beta);
  return {a < 1.0, fmt("fitted exponent %.3g +- %.2g over [%g, %g] (need < 1)", a, r.metric("growth_std_error"),
                       r.metric("fit_t_min"), r.metric("fit_t_max")) +
                       fmt("; reference 1/(1+8 beta) = %.3g, 0.2 at beta = 1/2", ref)};
}

Outcome fock() {
  const ScenarioReport r = run_fock(load("fock.yaml"));
  const bool trend = r.metric("distance_decreasing") == 1.0 && r.metric("l11_error_decreasing") == 1.0 &&
                     r.metric("l02_error_decreasing") == 1.0;
  double tail = 0.0;
  for (const char* c : {"tail_exact", "tail_approx"})
    for (double v : r.summary.column(c)) tail = std::max(tail, v);
  const std::vector<double> d = r.summary.column("distance");
  return {trend && tail < 1e-8,
          fmt("distance %.3g, %.3g, %.3g for N = 2, 4, 8", d[0], d[1], d[2]) +
              fmt("; L11, L02 errors decreasing: %g, %g; max truncation tail %.2g (< 1e-8)",
                  r.metric("l11_error_decreasing"), r.metric("l02_error_decreasing"), tail)};
}

Outcome rhs_oracles() {
  const Grid g = Grid::make(1, 32, 12.0);
  const PhysParams p{100.0, 0.4, 1};
  const Potential pot = scale_potential({1.0, 0.7}, p, g);
  const cplx I{0.0, 1.0};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const State st = random_state(rng, g, p);
    const Field f{g, random_vector(rng, 32)};
    const Mat vl = st.lambda.values.cwiseProduct(pot.pair.cast<cplx>());
    GmForcing gf;
    gm_nonlinear(st.phi.values, st.gamma.values, st.lambda.values, pot, p.N, {}, gf);
    GmForcing lf;
    gm_nonlinear(st.phi.values, st.gamma.values, st.lambda.values, pot, p.N, {RhsVariant::literal, false}, lf);

    const PairState ps = random_pair_state(rng, g, p, 1.2);
    const Mat sh2_ref = oracle_sh2(ps, pot);
    PairForcing pf;
    pair_nonlinear(ps.phi.values, ps.sh2.values, pot, p, pf);
    Vec hart;
    hartree_nonlinear(st.phi.values, pot, hart);
    const Vec hart_ref = -I * direct_convolution(pot, st.phi.values.cwiseAbs2().cast<cplx>()).cwiseProduct(st.phi.values);

    worst = std::max({worst, rel_err(convolve_density(pot, f).values, direct_convolution(pot, f.values)),
                      rel_err(rhs_phi(st, pot).values, oracle_phi(st, pot)),
                      rel_err(rhs_gamma(st, pot).values, oracle_gamma(st, pot)),
                      rel_err(rhs_gamma(st, pot, RhsVariant::literal).values, oracle_gamma(st, pot, false)),
                      rel_err(rhs_lambda(st, pot).values, oracle_lambda(st, pot)),
                      rel_err(gf.phi, Vec(I * oracle_phi(st, pot))),
                      rel_err(gf.gamma, Mat(-I * oracle_gamma(st, pot))),
                      rel_err(gf.lambda, Mat(I * (oracle_lambda(st, pot) - vl / p.N))),
                      rel_err(lf.gamma, Mat(-I * oracle_gamma(st, pot, false))),
                      rel_err(rhs_sh2(ps, pot).values, sh2_ref), rel_err(pf.sh2, Mat(I * sh2_ref)),
                      rel_err(pf.phi, Vec(I * oracle_phi(reconstruct_state(ps), pot))), rel_err(hart, hart_ref)});
  }
  return {worst <= 1e-10, fmt("max relative residual %.3g over 20 seeds at M = 32 (tol 1e-10)", worst)};
}

Outcome integrator_order() {
  RunConfig cfg = load("full.yaml");
  const Grid g = Grid::make(cfg.grid.d, cfg.grid.M, cfg.grid.L);
  const Potential pot = scale_potential(cfg.potential, cfg.physics, g);
  const State st0 = reconstruct_state(initial_data(g, cfg.physics, cfg.init));
  const double T = 0.5;
  StepController ctl;
  ctl.adaptive = false;
  std::vector<State> out;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    ctl.dt = dt;
    out.push_back(evolve(st0, pot, T, ctl, {T}, nullptr).final_state);
  }
  auto diff = [](const State& a, const State& b) {
    return std::sqrt((a.phi.values - b.phi.values).squaredNorm() + (a.gamma.values - b.gamma.values).squaredNorm() +
                     (a.lambda.values - b.lambda.values).squaredNorm()) /
           std::sqrt(b.phi.values.squaredNorm() + b.gamma.values.squaredNorm() + b.lambda.values.squaredNorm());
  };
  const double d1 = diff(out[0], out[1]), d2 = diff(out[1], out[2]);
  const double order = std::log2(d1 / d2);
  return {order >= 3.7, fmt("self-convergence differences %.3g, %.3g; observed order %.3g (need >= 3.7)", d1, d2,
                            order)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "operator identities", 10, identities},
      {2, "conservation", 60, conservation},
      {3, "flow cross-consistency", 120, flowcheck},
      {4, "free-flow exactness", 5, free_flow},
      {5, "Hartree consistency", 300, hartree},
      {6, "uniform-in-N monitors", 300, uniformity},
      {7, "sublinear growth", 600, growth},
      {8, "Fock N-trend", 600, fock},
      {9, "RHS oracle equivalence", 30, rhs_oracles},
      {10, "integrator order", 120, integrator_order},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool on_time = secs <= c.budget_s;
    const bool ok = o.passed && on_time;
    failed += ok ? 0 : 1;
    std::printf("%s criterion %d (%s): %s; %.1f s (budget %g s)\n", ok ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
