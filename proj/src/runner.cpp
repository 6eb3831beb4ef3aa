#include "tdhfb/runner.hpp"

#include "fft.hpp"
#include "tdhfb/errors.hpp"
#include "tdhfb/fock.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#ifndef TDHFB_VERSION
#define TDHFB_VERSION "0.0.0"
#endif

namespace tdhfb {

namespace {

// Tolerances of the scenario verdicts.
constexpr double kIdentityTol = 1e-10;
constexpr double kOracleTol = 1e-9;
constexpr double kFreeTol = 1e-10;
constexpr double kFlowTol = 1e-6;
constexpr double kHartreeTol = 1e-2;
constexpr double kUniformityTol = 0.1;
constexpr double kGrowthLimit = 1.0;
constexpr double kTailLimit = 1e-8;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tag(double N) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "_N%g", N);
  return buf;
}

void metric(ScenarioReport& r, const std::string& name, double v) { r.metrics.emplace_back(name, v); }
void note(ScenarioReport& r, const std::string& name, const std::string& v) { r.notes.emplace_back(name, v); }

double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& ref) {
  const double den = ref.norm();
  const double num = (a - ref).norm();
  return den > 0.0 ? num / den : num;
}

double rel_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& ref) {
  const double den = ref.norm();
  const double num = (a - ref).norm();
  return den > 0.0 ? num / den : num;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::vector<double> sweep_list(const RunConfig& cfg) {
  return cfg.N_list.empty() ? std::vector<double>{cfg.physics.N} : cfg.N_list;
}

PhysParams params_for(const RunConfig& cfg, double N) {
  PhysParams p = cfg.physics;
  p.N = N;
  p.dim = cfg.grid.d;
  p.validate();
  return p;
}

Grid grid_of(const RunConfig& cfg, LaplacianKind kind = LaplacianKind::spectral) {
  return Grid::make(cfg.grid.d, cfg.grid.M, cfg.grid.L, kind);
}

Monitor<State> state_monitor(const Potential& pot, const MonitorConfig& mc) {
  return [&pot, mc](double t, const State& st, const StepStats& stats) {
    DiagnosticsRow row = diagnostics_row(t, st, pot, mc);
    row.dt_used = stats.dt_used;
    row.step_error_estimate = stats.error_estimate;
    return row;
  };
}

// Diagnostics rows thinned by the monitor stride (the last row is always kept),
// optionally prefixed by N for sweeps.
void append_rows(Table& table, const std::vector<DiagnosticsRow>& rows, int stride, bool with_N, double N) {
  if (table.columns.empty()) {
    if (with_N) table.columns.push_back("N");
    for (const auto& c : DiagnosticsRow::columns()) table.columns.push_back(c);
  }
  const std::size_t s = static_cast<std::size_t>(std::max(1, stride));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k % s != 0 && k + 1 != rows.size()) continue;
    std::vector<double> v;
    if (with_N) v.push_back(N);
    const auto vals = rows[k].values();
    v.insert(v.end(), vals.begin(), vals.end());
    table.rows.push_back(std::move(v));
  }
}

double column_max(const std::vector<DiagnosticsRow>& rows, double DiagnosticsRow::*field, double t_max) {
  double m = 0.0;
  for (const auto& r : rows)
    if (r.t <= t_max + 1e-12) m = std::max(m, r.*field);
  return m;
}

// Relative spread (max - min) / min of per-N values.
double variation(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? (*hi - *lo) / *lo : std::numeric_limits<double>::infinity();
}

// Independent route to sh(k) and ch(k) - 1 through the Hermitian functional
// calculus of A conj(A), A = h^d k.
void hermitian_oracle(const Eigen::MatrixXcd& A, Eigen::MatrixXcd& sh, Eigen::MatrixXcd& p) {
  const Eigen::MatrixXcd H = A * A.conjugate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
  const Eigen::MatrixXcd& W = es.eigenvectors();
  const Index n = A.rows();
  Eigen::VectorXd f(n), g(n);
  for (Index i = 0; i < n; ++i) {
    const double lam = std::max(0.0, es.eigenvalues()[i]);
    const double r = std::sqrt(lam);
    f[i] = r < 1e-8 ? 1.0 + lam / 6.0 : std::sinh(r) / r;
    g[i] = 2.0 * std::sinh(0.5 * r) * std::sinh(0.5 * r);
  }
  sh = W * f.asDiagonal() * W.adjoint() * A;
  p = (W * g.asDiagonal() * W.adjoint()).conjugate();
}

}  // namespace

std::vector<double> Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  require(it != columns.end(), ErrorCode::argument, "table has no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

double ScenarioReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  fail(ErrorCode::argument, "report has no metric '" + name + "'");
}

bool ScenarioReport::has_metric(const std::string& name) const {
  return std::any_of(metrics.begin(), metrics.end(), [&](const auto& m) { return m.first == name; });
}

ScenarioReport run_identities(const RunConfig& cfg) {
  const IdentityConfig& ic = cfg.identities;
  require(ic.count >= 1 && ic.M >= 2 && ic.max_norm > 0.0, ErrorCode::config, "identities: invalid settings");
  ScenarioReport r;
  r.scenario = "identities";
  const Grid g = Grid::make(1, ic.M, cfg.grid.L);
  const double h = g.cell_volume();
  r.summary.columns = {"seed",       "op_norm",   "takagi_residual", "unitarity_residual",
                       "id_shsh_pp", "id_sh2",    "oracle_sh",       "oracle_p",
                       "p_hermiticity", "p_min_eig", "pass"};
  double worst_pp = 0.0, worst_sh2 = 0.0, worst_oracle = 0.0, worst_takagi = 0.0, worst_neg = 0.0;
  int passed = 0;
  for (int i = 0; i < ic.count; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uni(0.2, 1.0);
    Eigen::MatrixXcd G(ic.M, ic.M);
    for (Index c = 0; c < G.cols(); ++c)
      for (Index q = 0; q < G.rows(); ++q) G(q, c) = cplx(normal(rng), normal(rng));
    Eigen::MatrixXcd A = 0.5 * (G + G.transpose());
    const double target = ic.max_norm * uni(rng);
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXcd>(A).singularValues()[0];
    A *= target / smax;
    A = 0.5 * (A + A.transpose()).eval();

    const Kernel k{g, A / h, Symmetry::symmetric};
    const TakagiFactors tf = takagi(k);
    const HyperbolicKernels hk = hyperbolic_calculus(tf);
    const DoubleAngleKernels da = double_angle(tf);

    const double takagi_res = rel_diff(Eigen::MatrixXcd(tf.U * tf.sigma.asDiagonal() * tf.U.transpose()), A);
    const double unitarity =
        (tf.U.adjoint() * tf.U - Eigen::MatrixXcd::Identity(ic.M, ic.M)).norm();

    Kernel shbar = hk.sh;
    shbar.values = hk.sh.values.conjugate();
    const Kernel lhs = compose(shbar, hk.sh);
    const Kernel pp = compose(hk.p, hk.p);
    const Eigen::MatrixXcd rhs1 = pp.values + 2.0 * hk.p.values;
    const double den1 = std::max(lhs.values.norm(), rhs1.norm());
    const double id_pp = den1 > 0.0 ? (lhs.values - rhs1).norm() / den1 : 0.0;

    const Kernel shp = compose(hk.sh, hk.p);
    const Eigen::MatrixXcd rhs2 = 2.0 * hk.sh.values + 2.0 * shp.values;
    const double id_sh2 = rel_diff(da.sh2.values, rhs2);

    Eigen::MatrixXcd sh_o, p_o;
    hermitian_oracle(A, sh_o, p_o);
    const double o_sh = rel_diff(Eigen::MatrixXcd(h * hk.sh.values), sh_o);
    const double o_p = rel_diff(Eigen::MatrixXcd(h * hk.p.values), p_o);

    const Eigen::MatrixXcd P = h * hk.p.values;
    const double p_herm = hermiticity_residual(P);
    const double p_min =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (P + P.adjoint()), Eigen::EigenvaluesOnly)
            .eigenvalues()[0];

    const bool ok = id_pp <= kIdentityTol && id_sh2 <= kIdentityTol && o_sh <= kOracleTol && o_p <= kOracleTol &&
                    p_min >= -1e-12 * std::max(1.0, P.norm());
    passed += ok ? 1 : 0;
    worst_pp = std::max(worst_pp, id_pp);
    worst_sh2 = std::max(worst_sh2, id_sh2);
    worst_oracle = std::max({worst_oracle, o_sh, o_p});
    worst_takagi = std::max(worst_takagi, takagi_res);
    worst_neg = std::min(worst_neg, p_min);
    r.summary.rows.push_back({static_cast<double>(seed), target, takagi_res, unitarity, id_pp, id_sh2, o_sh, o_p,
                              p_herm, p_min, ok ? 1.0 : 0.0});
  }
  metric(r, "kernels", ic.count);
  metric(r, "kernels_passed", passed);
  metric(r, "max_id_shsh_pp", worst_pp);
  metric(r, "max_id_sh2", worst_sh2);
  metric(r, "max_oracle_residual", worst_oracle);
  metric(r, "max_takagi_residual", worst_takagi);
  metric(r, "min_p_eigenvalue", worst_neg);
  metric(r, "identity_tolerance", kIdentityTol);
  metric(r, "oracle_tolerance", kOracleTol);
  r.passed = passed == ic.count;
  r.verdict = std::to_string(passed) + "/" + std::to_string(ic.count) + " kernels pass";
  return r;
}

ScenarioReport run_free(const RunConfig& cfg) {
  ScenarioReport r;
  r.scenario = "free";
  const Grid g = grid_of(cfg);
  const PhysParams params = params_for(cfg, cfg.physics.N);
  const Potential pot = scale_potential({cfg.potential.sigma, 0.0}, params, g);
  const double L = g.length();
  const int M = g.points_per_axis();
  const double dk = 2.0 * std::numbers::pi / L;
  const int na = static_cast<int>(std::lround(cfg.init.phi.momentum / dk));
  const int nb = na + 3, nc = na + 1;
  require(std::abs(nb) < M / 2 && std::abs(na) < M / 2, ErrorCode::config,
          "free: plane-wave momenta exceed the grid band limit");

  // Plane wave exp(i xi x_0) evaluated at time t: exp(i xi x_0 - i |xi|^2 t).
  auto wave = [&](int n, double t) {
    Field f = Field::zeros(g);
    const double xi = n * dk;
    for (Index p = 0; p < g.size(); ++p) f.values[p] = std::polar(1.0, xi * g.coordinate(p, 0) - xi * xi * t);
    return f;
  };
  auto phi_at = [&](double t) {
    Field f = wave(na, t);
    f.values += 0.5 * wave(nb, t).values;
    return f;
  };
  const double norm0 = l2_norm(phi_at(0.0));
  const double wnorm = l2_norm(wave(nc, 0.0));
  const double N = params.N;
  auto exact = [&](double t) {
    const Eigen::VectorXcd phi = phi_at(t).values / norm0;
    const Eigen::VectorXcd w = wave(nc, t).values / wnorm;
    State s{Field{g, phi}, Kernel::zeros(g, Symmetry::hermitian), Kernel::zeros(g, Symmetry::symmetric), params};
    s.gamma.values = phi.conjugate() * phi.transpose() + (1.0 / N) * w.conjugate() * w.transpose();
    s.lambda.values = phi * phi.transpose() + (1.0 / N) * w * w.transpose();
    return s;
  };

  const State init = exact(0.0);
  r.summary.columns = {"t", "phi_error", "gamma_error", "lambda_error"};
  const MonitorConfig mc = cfg.monitors;
  Monitor<State> mon = [&](double t, const State& st, const StepStats& stats) {
    const State ex = exact(t);
    r.summary.rows.push_back({t, rel_diff(st.phi.values, ex.phi.values), rel_diff(st.gamma.values, ex.gamma.values),
                              rel_diff(st.lambda.values, ex.lambda.values)});
    DiagnosticsRow row = diagnostics_row(t, st, pot, mc);
    row.dt_used = stats.dt_used;
    row.step_error_estimate = stats.error_estimate;
    return row;
  };
  RhsOptions opts{cfg.rhs_variant, true};
  auto traj = evolve(init, pot, cfg.T, cfg.time, uniform_samples(cfg.T, cfg.samples), mon, opts);
  accumulate_time_integrals(traj.rows);
  append_rows(r.diagnostics, traj.rows, cfg.monitors.stride, false, N);

  double worst = 0.0;
  for (const auto& row : r.summary.rows) worst = std::max({worst, row[1], row[2], row[3]});
  const DriftReport dr = drift_report(traj.rows, cfg.monitors.drift_threshold);
  metric(r, "free_max_error", worst);
  metric(r, "free_final_phi_error", r.summary.rows.back()[1]);
  metric(r, "free_tolerance", kFreeTol);
  metric(r, "number_drift", dr.number_drift);
  metric(r, "energy_drift", dr.energy_drift);
  metric(r, "steps_accepted", static_cast<double>(traj.accepted));
  r.passed = worst <= kFreeTol;
  r.verdict = r.passed ? "free flow matches the closed form" : "free flow deviates from the closed form";
  return r;
}

ScenarioReport run_hartree(const RunConfig& cfg) {
  ScenarioReport r;
  r.scenario = "hartree";
  const Grid g = grid_of(cfg);
  InitialConfig init = cfg.init;
  init.k.amp = 0.0;
  const std::vector<double> samples = uniform_samples(cfg.T, cfg.samples);
  const std::vector<double> Ns = sweep_list(cfg);
  const bool sweep = Ns.size() > 1;
  RhsOptions opts{cfg.rhs_variant, true};
  r.summary.columns = {"N", "sup_phi_error", "sup_phi_error_t1", "max_sobolev_phi", "max_sobolev_gamma",
                       "number_drift", "energy_drift"};
  std::vector<double> err1, sob_phi, sob_gamma;
  for (double N : Ns) {
    const PhysParams params = params_for(cfg, N);
    const Potential pot = scale_potential(cfg.potential, params, g);
    const PairState ps = initial_data(g, params, init);
    std::vector<Field> gm_phi;
    Monitor<State> mon = [&](double t, const State& st, const StepStats& stats) {
      if (t > 0.0) gm_phi.push_back(st.phi);
      DiagnosticsRow row = diagnostics_row(t, st, pot, cfg.monitors);
      row.dt_used = stats.dt_used;
      row.step_error_estimate = stats.error_estimate;
      return row;
    };
    auto traj = evolve(reconstruct_state(ps), pot, cfg.T, cfg.time, samples, mon, opts);
    accumulate_time_integrals(traj.rows);
    const std::vector<Field> hartree = evolve_hartree(ps.phi, pot, cfg.time, samples);
    require(hartree.size() == gm_phi.size(), ErrorCode::argument, "hartree: sample count mismatch");
    double sup = 0.0, sup1 = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      Field d = gm_phi[k];
      d.values -= hartree[k].values;
      const double e = l2_norm(d);
      sup = std::max(sup, e);
      if (samples[k] <= 1.0 + 1e-12) sup1 = std::max(sup1, e);
    }
    const DriftReport dr = drift_report(traj.rows, cfg.monitors.drift_threshold);
    const double sp = column_max(traj.rows, &DiagnosticsRow::sobolev_phi, cfg.T);
    const double sg = column_max(traj.rows, &DiagnosticsRow::sobolev_gamma, cfg.T);
    err1.push_back(sup1);
    sob_phi.push_back(sp);
    sob_gamma.push_back(sg);
    r.summary.rows.push_back({N, sup, sup1, sp, sg, dr.number_drift, dr.energy_drift});
    append_rows(r.diagnostics, traj.rows, cfg.monitors.stride, sweep, N);
    metric(r, "sup_phi_error" + tag(N), sup);
    metric(r, "sup_phi_error_t1" + tag(N), sup1);
    metric(r, "max_sobolev_phi" + tag(N), sp);
    metric(r, "max_sobolev_gamma" + tag(N), sg);
  }
  const bool decreasing = strictly_decreasing(err1);
  const bool small = err1.back() <= kHartreeTol;
  metric(r, "sobolev_phi_variation", variation(sob_phi));
  metric(r, "sobolev_gamma_variation", variation(sob_gamma));
  metric(r, "hartree_tolerance", kHartreeTol);
  metric(r, "uniformity_tolerance", kUniformityTol);
  metric(r, "error_strictly_decreasing", decreasing ? 1.0 : 0.0);
  r.passed = decreasing && small;
  r.verdict = std::string(decreasing ? "error decreasing in N" : "error not decreasing in N") +
              (small ? ", within tolerance at largest N" : ", above tolerance at largest N");
  return r;
}

ScenarioReport run_full(const RunConfig& cfg) {
  ScenarioReport r;
  r.scenario = "full";
  const Grid g = grid_of(cfg);
  const std::vector<double> samples = uniform_samples(cfg.T, cfg.samples);
  const std::vector<double> Ns = sweep_list(cfg);
  const bool sweep = Ns.size() > 1;
  RhsOptions opts{cfg.rhs_variant, true};
  r.summary.columns = {"N",          "number_drift",      "energy_drift",      "max_sobolev_phi",
                       "max_sobolev_gamma", "max_sobolev_lambda", "growth_exponent", "growth_std_error",
                       "steps_accepted",    "steps_rejected"};
  std::vector<double> sob_phi, sob_gamma;
  bool drift_ok = true, growth_ok = true;
  for (double N : Ns) {
    const std::string sfx = sweep ? tag(N) : "";
    const PhysParams params = params_for(cfg, N);
    const Potential pot = scale_potential(cfg.potential, params, g);
    const PairState ps = initial_data(g, params, cfg.init);
    const State st0 = reconstruct_state(ps);
    metric(r, "energy_route_difference_t0" + sfx,
           std::abs(energy(ps, pot) - energy(st0, pot)) / std::max(1.0, std::abs(energy(ps, pot))));
    auto traj = evolve(st0, pot, cfg.T, cfg.time, samples, state_monitor(pot, cfg.monitors), opts);
    accumulate_time_integrals(traj.rows);
    append_rows(r.diagnostics, traj.rows, cfg.monitors.stride, sweep, N);

    const DriftReport dr = drift_report(traj.rows, cfg.monitors.drift_threshold);
    drift_ok = drift_ok && dr.passed;
    const double sp = column_max(traj.rows, &DiagnosticsRow::sobolev_phi, cfg.T);
    const double sg = column_max(traj.rows, &DiagnosticsRow::sobolev_gamma, cfg.T);
    const double sl = column_max(traj.rows, &DiagnosticsRow::sobolev_lambda, cfg.T);
    sob_phi.push_back(sp);
    sob_gamma.push_back(sg);

    GrowthFit fit;
    bool have_fit = false;
    if (cfg.T > cfg.monitors.fit_t_min) {
      std::vector<double> t, v;
      for (const auto& row : traj.rows) {
        t.push_back(row.t);
        v.push_back(row.sobolev_lambda);
      }
      try {
        fit = growth_fit(t, v, cfg.monitors.fit_t_min, cfg.monitors.fit_t_max);
        have_fit = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::fit) throw;
        note(r, "growth_fit" + sfx, e.what());
      }
    }
    if (have_fit) {
      growth_ok = growth_ok && fit.exponent < kGrowthLimit;
      metric(r, "growth_exponent" + sfx, fit.exponent);
      metric(r, "growth_std_error" + sfx, fit.std_error);
      metric(r, "growth_prefactor" + sfx, fit.prefactor);
      metric(r, "growth_fit_samples" + sfx, fit.samples);
    }
    metric(r, "number_drift" + sfx, dr.number_drift);
    metric(r, "energy_drift" + sfx, dr.energy_drift);
    metric(r, "max_sobolev_phi" + sfx, sp);
    metric(r, "max_sobolev_gamma" + sfx, sg);
    metric(r, "max_sobolev_lambda" + sfx, sl);
    metric(r, "steps_accepted" + sfx, static_cast<double>(traj.accepted));
    metric(r, "steps_rejected" + sfx, static_cast<double>(traj.rejected));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.summary.rows.push_back({N, dr.number_drift, dr.energy_drift, sp, sg, sl, have_fit ? fit.exponent : nan,
                              have_fit ? fit.std_error : nan, static_cast<double>(traj.accepted),
                              static_cast<double>(traj.rejected)});
  }
  metric(r, "drift_threshold", cfg.monitors.drift_threshold);
  metric(r, "growth_exponent_limit", kGrowthLimit);
  metric(r, "fit_t_min", cfg.monitors.fit_t_min);
  metric(r, "fit_t_max", std::min(cfg.monitors.fit_t_max, cfg.T));
  if (sweep) {
    metric(r, "sobolev_phi_variation", variation(sob_phi));
    metric(r, "sobolev_gamma_variation", variation(sob_gamma));
    metric(r, "uniformity_tolerance", kUniformityTol);
  }
  r.passed = drift_ok && growth_ok;
  r.verdict = std::string(drift_ok ? "drift within threshold" : "drift beyond threshold") +
              (growth_ok ? "" : ", growth exponent not sublinear");
  if (!drift_ok) r.exit_code = exit_numerical;
  return r;
}

ScenarioReport run_flowcheck(const RunConfig& cfg) {
  ScenarioReport r;
  r.scenario = "flowcheck";
  const Grid g = grid_of(cfg);
  const PhysParams params = params_for(cfg, cfg.physics.N);
  const Potential pot = scale_potential(cfg.potential, params, g);
  const PairState ps = initial_data(g, params, cfg.init);
  const std::vector<double> samples = uniform_samples(cfg.T, cfg.samples);

  std::vector<State> gm;
  std::vector<PairState> pair;
  Monitor<State> mg = [&](double t, const State& st, const StepStats& stats) {
    gm.push_back(st);
    DiagnosticsRow row = diagnostics_row(t, st, pot, cfg.monitors);
    row.dt_used = stats.dt_used;
    row.step_error_estimate = stats.error_estimate;
    return row;
  };
  Monitor<PairState> mp = [&](double t, const PairState& s, const StepStats&) {
    pair.push_back(s);
    DiagnosticsRow row;
    row.t = t;
    return row;
  };
  auto tg = evolve(reconstruct_state(ps), pot, cfg.T, cfg.time, samples, mg, RhsOptions{cfg.rhs_variant, true});
  auto tp = evolve(ps, pot, cfg.T, cfg.time, samples, mp);
  accumulate_time_integrals(tg.rows);
  append_rows(r.diagnostics, tg.rows, cfg.monitors.stride, false, params.N);
  require(gm.size() == pair.size(), ErrorCode::argument, "flowcheck: sample count mismatch");

  r.summary.columns = {"t", "div_phi", "div_gamma", "div_lambda"};
  double worst = 0.0;
  for (std::size_t k = 0; k < gm.size(); ++k) {
    const State rs = reconstruct_state(pair[k]);
    const double a = rel_diff(gm[k].phi.values, rs.phi.values);
    const double b = rel_diff(gm[k].gamma.values, rs.gamma.values);
    const double c = rel_diff(gm[k].lambda.values, rs.lambda.values);
    worst = std::max({worst, a, b, c});
    r.summary.rows.push_back({tg.times[k], a, b, c});
  }
  metric(r, "flow_divergence", worst);
  metric(r, "flow_tolerance", kFlowTol);
  metric(r, "gm_steps_accepted", static_cast<double>(tg.accepted));
  metric(r, "pair_steps_accepted", static_cast<double>(tp.accepted));
  r.passed = worst <= kFlowTol;
  r.verdict = r.passed ? "flows agree" : "flows diverge";
  return r;
}

ScenarioReport run_fock(const RunConfig& cfg) {
  const FockConfig& fc = cfg.fock;
  ScenarioReport r;
  r.scenario = "fock";
  const int M = fc.M_sites;
  require(static_cast<int>(fc.phi.size()) == M, ErrorCode::config, "fock.phi must have M_sites entries");
  require(static_cast<int>(fc.k_hat.size()) == M * M, ErrorCode::config, "fock.k_hat must have M_sites^2 entries");
  const Grid g = Grid::make(1, M, fc.L, LaplacianKind::lattice);
  const double h = g.cell_volume();

  Field phi0 = Field::zeros(g);
  for (int j = 0; j < M; ++j) phi0.values[j] = fc.phi[static_cast<std::size_t>(j)];
  const double pn = l2_norm(phi0);
  require(pn > 0.0, ErrorCode::config, "fock.phi must be non-zero");
  phi0.values /= pn;
  Kernel k0 = Kernel::zeros(g, Symmetry::symmetric);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) k0.values(i, j) = fc.k_hat[static_cast<std::size_t>(i * M + j)] / h;
  const TakagiFactors tf0 = takagi(k0);
  const double pair_number = tf0.sigma.array().sinh().square().sum();

  StepController ctl = cfg.time;
  ctl.rtol = std::min(ctl.rtol, 1e-11);
  ctl.dt = std::min(ctl.dt, 1e-3);
  ctl.max_dt = std::min(ctl.max_dt, 1e-2);
  note(r, "tdhfb_controller", "rtol " + fmt(ctl.rtol) + ", max_dt " + fmt(ctl.max_dt));

  r.summary.columns = {"N",           "n_max",       "dimension",    "distance",     "l11_error", "l02_error",
                       "l01_error",   "tail_exact",  "tail_approx",  "marginal_error_t0", "norm_drift",
                       "number_drift", "energy_drift"};
  std::vector<double> dist, e11, e02;
  for (double N : fc.N_list) {
    PhysParams params;
    params.N = N;
    params.beta = fc.beta;
    params.dim = 1;
    params.validate();
    const Potential pot = scale_potential({fc.sigma, fc.strength}, params, g);

    const PairState ps0{phi0, double_angle(tf0).sh2, params};
    const State st0 = reconstruct_state(ps0);
    const auto traj = evolve(st0, pot, fc.T, ctl, {fc.T}, nullptr);
    const State& stT = traj.final_state;
    Kernel sh2T = stT.lambda;
    sh2T.values = 2.0 * N * (stT.lambda.values - stT.phi.values * stT.phi.values.transpose());
    sh2T.values = (0.5 * (sh2T.values + sh2T.values.transpose())).eval();
    sh2T.symmetry = Symmetry::symmetric;
    const Kernel kT = kernel_of(k_from_sh2(sh2T));

    int n_max = fc.n_max;
    const bool automatic = n_max == 0;
    if (automatic) {
      const double mean = N + pair_number;
      n_max = static_cast<int>(std::ceil(mean + 6.0 * std::sqrt(mean + 1.0) + 6.0));
    }
    FockBasisPtr basis;
    FockVector psi0, approx;
    for (;;) {
      basis = FockBasis::make(M, n_max);
      try {
        psi0 = prepare(basis, phi0, k0, N);
        approx = prepare(basis, stT.phi, kT, N);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::truncation_insufficient || !automatic || n_max >= 400) throw;
        n_max += 4;
      }
    }
    const FockOperator H = hamiltonian(basis, pot, params);
    const ExactPropagator prop(H);
    const FockVector psiT = prop.evolve(psi0, fc.T);

    const Marginals m0 = marginals(psi0, g, N);
    const double err_t0 = std::max({rel_diff(m0.l01.values, st0.phi.values), rel_diff(m0.l11.values, st0.gamma.values),
                                    rel_diff(m0.l02.values, st0.lambda.values)});
    const Marginals mT = marginals(psiT, g, N);
    const double d = phase_opt_distance(psiT, approx);
    Kernel diff = mT.l11;
    diff.values -= stT.gamma.values;
    const double a11 = l2_norm(diff);
    diff.values = mT.l02.values - stT.lambda.values;
    const double a02 = l2_norm(diff);
    Field fd = mT.l01;
    fd.values -= stT.phi.values;
    const double a01 = l2_norm(fd);

    const double norm_drift = std::abs(psiT.norm() - psi0.norm());
    const double n0 = N * h * m0.l11.values.trace().real(), nT = N * h * mT.l11.values.trace().real();
    const double E0 = expectation(H, psi0), ET = expectation(H, psiT);
    const double number_drift = std::abs(nT - n0) / std::max(1.0, std::abs(n0));
    const double energy_drift = std::abs(ET - E0) / std::max(1.0, std::abs(E0));

    dist.push_back(d);
    e11.push_back(a11);
    e02.push_back(a02);
    r.summary.rows.push_back({N, static_cast<double>(n_max), static_cast<double>(basis->dimension()), d, a11, a02,
                              a01, psiT.truncation_tail(), approx.truncation_tail(), err_t0, norm_drift,
                              number_drift, energy_drift});
    metric(r, "distance" + tag(N), d);
    metric(r, "l11_error" + tag(N), a11);
    metric(r, "l02_error" + tag(N), a02);
    metric(r, "marginal_error_t0" + tag(N), err_t0);
    metric(r, "n_max" + tag(N), n_max);
  }
  const bool dd = strictly_decreasing(dist), d11 = strictly_decreasing(e11), d02 = strictly_decreasing(e02);
  metric(r, "distance_decreasing", dd ? 1.0 : 0.0);
  metric(r, "l11_error_decreasing", d11 ? 1.0 : 0.0);
  metric(r, "l02_error_decreasing", d02 ? 1.0 : 0.0);
  metric(r, "truncation_tail_limit", kTailLimit);
  r.passed = dd && d11 && d02;
  r.verdict = r.passed ? "distance and marginal errors strictly decreasing in N"
                       : "N-trend not monotone";
  return r;
}

ScenarioReport run_scenario(const RunConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::identities: return run_identities(cfg);
    case Scenario::free: return run_free(cfg);
    case Scenario::hartree: return run_hartree(cfg);
    case Scenario::full: return run_full(cfg);
    case Scenario::flowcheck: return run_flowcheck(cfg);
    case Scenario::fock: return run_fock(cfg);
  }
  fail(ErrorCode::argument, "unknown scenario");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::argument:
    case ErrorCode::domain_too_small:
    case ErrorCode::grid_mismatch:
    case ErrorCode::io:
      return exit_config;
    case ErrorCode::truncation_insufficient:
      return exit_truncation;
    default:
      return exit_numerical;
  }
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt(row[c]);
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path);
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ManifestState {
  std::string status = "running";
  int exit_code = -1;
  double wall_clock = 0.0;
  const ScenarioReport* report = nullptr;
  std::string error;
};

void emit_double(YAML::Emitter& e, const std::string& key, double v) {
  e << YAML::Key << key << YAML::Value;
  if (std::isfinite(v))
    e << YAML::Precision(17) << v;
  else
    e << (std::isnan(v) ? ".nan" : (v > 0 ? ".inf" : "-.inf"));
}

void write_manifest(const RunConfig& cfg, const std::string& started, const ManifestState& ms) {
  const PhysParams& p = cfg.physics;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "status" << YAML::Value << ms.status;
  e << YAML::Key << "exit_code" << YAML::Value << ms.exit_code;
  e << YAML::Key << "scenario" << YAML::Value << to_string(cfg.scenario);
  e << YAML::Key << "started_utc" << YAML::Value << started;
  emit_double(e, "wall_clock_seconds", ms.wall_clock);
  if (!ms.error.empty()) e << YAML::Key << "error" << YAML::Value << ms.error;

  e << YAML::Key << "versions" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tdhfb" << YAML::Value << TDHFB_VERSION;
  e << YAML::Key << "eigen" << YAML::Value
    << (std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
        std::to_string(EIGEN_MINOR_VERSION));
  e << YAML::Key << "fft" << YAML::Value << detail::fft_library_version();
  e << YAML::Key << "compiler" << YAML::Value << __VERSION__;
  e << YAML::EndMap;

  e << YAML::Key << "derived" << YAML::Value << YAML::BeginMap;
  emit_double(e, "epsilon", p.epsilon());
  emit_double(e, "growth_reference", 1.0 / (1.0 + 8.0 * p.beta));
  emit_double(e, "epsilon_beta_half", 0.1);
  emit_double(e, "growth_reference_beta_half", 0.2);
  emit_double(e, "sobolev_order", cfg.monitors.order(p));
  emit_double(e, "N_power_d_beta", std::pow(p.N, cfg.grid.d * p.beta));
  emit_double(e, "lebesgue_exponent", cfg.monitors.lebesgue_exponent);
  e << YAML::EndMap;

  e << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap;
  emit_double(e, "identity", kIdentityTol);
  emit_double(e, "identity_oracle", kOracleTol);
  emit_double(e, "free_flow", kFreeTol);
  emit_double(e, "flow_divergence", kFlowTol);
  emit_double(e, "hartree_error_largest_N", kHartreeTol);
  emit_double(e, "uniformity_variation", kUniformityTol);
  emit_double(e, "growth_exponent", kGrowthLimit);
  emit_double(e, "drift", cfg.monitors.drift_threshold);
  emit_double(e, "truncation_tail", kTailLimit);
  e << YAML::EndMap;

  if (ms.report) {
    const ScenarioReport& r = *ms.report;
    e << YAML::Key << "passed" << YAML::Value << r.passed;
    e << YAML::Key << "verdict" << YAML::Value << r.verdict;
    e << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : r.metrics) emit_double(e, k, v);
    e << YAML::EndMap;
    if (!r.notes.empty()) {
      e << YAML::Key << "notes" << YAML::Value << YAML::BeginMap;
      for (const auto& [k, v] : r.notes) e << YAML::Key << k << YAML::Value << v;
      e << YAML::EndMap;
    }
  }
  e << YAML::Key << "config" << YAML::Value << YAML::Load(to_yaml(cfg));
  e << YAML::EndMap;

  const std::string path = (std::filesystem::path(cfg.out_dir) / "manifest.yaml").string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
  out << e.c_str() << '\n';
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    validate(cfg);
    std::filesystem::create_directories(cfg.out_dir);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_config;
  }

  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  ManifestState ms;
  try {
    write_manifest(cfg, started, ms);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_config;
  }

  ScenarioReport report;
  int code = exit_ok;
  try {
    report = run_scenario(cfg);
    const std::filesystem::path dir(cfg.out_dir);
    if (!report.diagnostics.empty()) write_csv((dir / "diagnostics.csv").string(), report.diagnostics);
    if (!report.summary.empty()) write_csv((dir / "summary.csv").string(), report.summary);
    code = report.exit_code;
    ms.report = &report;
    ms.status = code == exit_ok ? "ok" : "failed";
    log << report.scenario << ": " << report.verdict << '\n';
  } catch (const IntegrationError& e) {
    code = exit_code_for(e.code());
    ms.status = "failed";
    ms.error = std::string(to_string(e.code())) + " at t = " + fmt(e.time()) + ": " + e.what();
  } catch (const Error& e) {
    code = exit_code_for(e.code());
    ms.status = "failed";
    ms.error = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    code = exit_numerical;
    ms.status = "failed";
    ms.error = e.what();
  }
  if (!ms.error.empty()) log << "error: " << ms.error << '\n';

  ms.exit_code = code;
  ms.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_manifest(cfg, started, ms);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    if (code == exit_ok) code = exit_config;
  }
  return code;
}

}  // namespace tdhfb
