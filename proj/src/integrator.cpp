#include "tdhfb/integrator.hpp"

#include "tdhfb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tdhfb {

namespace {

constexpr cplx I{0.0, 1.0};

// One dynamical component with its free-flow signature; fields are n x 1.
struct Block {
  Eigen::MatrixXcd v;
  int s1 = 1;
  int s2 = 0;
  bool kernel = false;
};

using Blocks = std::vector<Block>;
using Forcing = std::function<void(const Blocks& u, Blocks& out)>;

void propagate(const Grid& g, Blocks& b, double t) {
  for (auto& blk : b) {
    if (blk.kernel)
      apply_free_propagator(g, blk.v, t, blk.s1, blk.s2);
    else
      apply_free_propagator(g, blk.v.col(0), t, blk.s1);
  }
}

// out = a + c * b
void axpy(Blocks& out, const Blocks& a, double c, const Blocks& b) {
  out = a;
  for (std::size_t k = 0; k < a.size(); ++k) out[k].v.noalias() += c * b[k].v;
}

void add_scaled(Blocks& out, double c, const Blocks& b) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k].v.noalias() += c * b[k].v;
}

// L u = i (s1 Lap_x + s2 Lap_y) u
void linear_part(const Grid& g, const Blocks& u, Blocks& out) {
  out = u;
  for (auto& blk : out) {
    if (blk.kernel)
      apply_laplacian(g, blk.v, blk.s1, blk.s2);
    else
      apply_laplacian(g, blk.v.col(0), blk.s1);
    blk.v *= I;
  }
}

double l2(const Grid& g, const Blocks& b) {
  double s = 0.0;
  for (const auto& blk : b) {
    const double w = blk.kernel ? g.cell_volume() * g.cell_volume() : g.cell_volume();
    s += w * blk.v.squaredNorm();
  }
  return std::sqrt(s);
}

double relative_difference(const Grid& g, const Blocks& a, const Blocks& b) {
  Blocks d = a;
  for (std::size_t k = 0; k < a.size(); ++k) d[k].v -= b[k].v;
  const double nb = l2(g, b);
  return nb > 0.0 ? l2(g, d) / nb : l2(g, d);
}

bool all_finite(const Blocks& b) {
  for (const auto& blk : b)
    if (!blk.v.allFinite()) return false;
  return true;
}

// k1_given is N(u) when already known.
Blocks lawson_step(const Grid& g, const Blocks& u, double h, const Forcing& f, const Blocks* k1_given) {
  Blocks k1, k2 = u, k3 = u, k4 = u, a, b;
  if (k1_given)
    k1 = *k1_given;
  else
    f(u, k1);

  axpy(a, u, 0.5 * h, k1);
  propagate(g, a, 0.5 * h);
  f(a, k2);

  Blocks eu_half = u;
  propagate(g, eu_half, 0.5 * h);
  axpy(b, eu_half, 0.5 * h, k2);
  f(b, k3);

  Blocks ek3 = k3;
  propagate(g, ek3, 0.5 * h);
  Blocks e = eu_half;
  propagate(g, e, 0.5 * h);
  add_scaled(e, h, ek3);
  f(e, k4);

  Blocks w;
  axpy(w, u, h / 6.0, k1);
  propagate(g, w, h);
  Blocks z;
  axpy(z, k2, 1.0, k3);
  propagate(g, z, 0.5 * h);
  add_scaled(w, h / 3.0, z);
  add_scaled(w, h / 6.0, k4);
  return w;
}

Blocks rk4_step(const Grid& g, const Blocks& u, double h, const Forcing& f, const Blocks* n_given) {
  auto full = [&](const Blocks& x, Blocks& out) {
    linear_part(g, x, out);
    Blocks n = x;
    f(x, n);
    add_scaled(out, 1.0, n);
  };
  Blocks k1, k2, k3, k4, tmp;
  if (n_given) {
    linear_part(g, u, k1);
    add_scaled(k1, 1.0, *n_given);
  } else {
    full(u, k1);
  }
  axpy(tmp, u, 0.5 * h, k1);
  full(tmp, k2);
  axpy(tmp, u, 0.5 * h, k2);
  full(tmp, k3);
  axpy(tmp, u, h, k3);
  full(tmp, k4);
  Blocks out = u;
  add_scaled(out, h / 6.0, k1);
  add_scaled(out, h / 3.0, k2);
  add_scaled(out, h / 3.0, k3);
  add_scaled(out, h / 6.0, k4);
  return out;
}

Blocks one_step(const Grid& g, const Blocks& u, double h, Scheme scheme, const Forcing& f,
                const Blocks* n_given = nullptr) {
  return scheme == Scheme::lawson_rk4 ? lawson_step(g, u, h, f, n_given) : rk4_step(g, u, h, f, n_given);
}

struct EngineResult {
  Blocks final_state;
  long accepted = 0;
  long rejected = 0;
};

using SampleSink = std::function<void(double t, const Blocks& u, const StepStats& stats)>;

std::vector<double> targets_for(double T, const std::vector<double>& samples) {
  std::vector<double> out;
  for (double s : samples)
    if (s > 0.0 && s < T) out.push_back(s);
  out.push_back(T);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EngineResult run_engine(const Grid& g, Blocks u, double T, const StepController& ctl,
                        const std::vector<double>& samples, const Forcing& f, const SampleSink& sink) {
  ctl.validate();
  require(T > 0.0 && std::isfinite(T), ErrorCode::argument, "evolve: T must be positive");
  EngineResult res;
  double t = 0.0;
  double dt = ctl.dt;
  StepStats stats;
  if (sink) sink(0.0, u, stats);
  const double snap = 1e-12 * std::max(1.0, T);

  for (double target : targets_for(T, samples)) {
    while (target - t > snap) {
      double h = std::min(dt, target - t);
      if (target - t - h <= snap) h = target - t;
      if (!ctl.adaptive) {
        u = one_step(g, u, h, ctl.scheme, f);
        stats = {h, 0.0};
        t += h;
        ++res.accepted;
      } else {
        Blocks n0;
        f(u, n0);
        const Blocks big = one_step(g, u, h, ctl.scheme, f, &n0);
        const Blocks half =
            one_step(g, one_step(g, u, 0.5 * h, ctl.scheme, f, &n0), 0.5 * h, ctl.scheme, f);
        const double err = relative_difference(g, half, big);
        if (std::isfinite(err) && err <= ctl.rtol) {
          u = half;
          t += h;
          stats = {h, err};
          ++res.accepted;
          if (h >= dt) {
            const double grow = err > 0.0 ? 0.9 * std::pow(ctl.rtol / err, 0.2) : 2.0;
            dt = std::min(ctl.max_dt, dt * std::clamp(grow, 1.0, 2.0));
          }
        } else {
          ++res.rejected;
          dt = 0.5 * h;
          if (dt < ctl.min_dt)
            throw IntegrationError(ErrorCode::stiffness, t,
                                   "step size fell below min_dt = " + std::to_string(ctl.min_dt) +
                                       " at t = " + std::to_string(t));
          continue;
        }
      }
      if (!all_finite(u))
        throw IntegrationError(ErrorCode::numerical_blowup, t,
                               "state became non-finite at t = " + std::to_string(t));
    }
    t = target;
    if (sink) sink(t, u, stats);
  }
  res.final_state = std::move(u);
  return res;
}

Blocks to_blocks(const State& st) {
  return {Block{st.phi.values, 1, 0, false}, Block{st.gamma.values, -1, 1, true},
          Block{st.lambda.values, 1, 1, true}};
}

State from_blocks(const Blocks& b, const State& like) {
  const Grid& g = like.phi.grid;
  return State{{g, b[0].v.col(0)}, {g, b[1].v, Symmetry::hermitian}, {g, b[2].v, Symmetry::symmetric},
               like.params};
}

Blocks to_blocks(const PairState& ps) {
  return {Block{ps.phi.values, 1, 0, false}, Block{ps.sh2.values, 1, 1, true}};
}

PairState from_blocks(const Blocks& b, const PairState& like) {
  const Grid& g = like.phi.grid;
  return PairState{{g, b[0].v.col(0)}, {g, b[1].v, Symmetry::symmetric}, like.params};
}

Forcing gm_forcing(const Potential& pot, double N, const RhsOptions& opts) {
  return [&pot, N, opts](const Blocks& u, Blocks& out) {
    GmForcing f;
    gm_nonlinear(u[0].v.col(0), u[1].v, u[2].v, pot, N, opts, f);
    out = u;
    out[0].v = f.phi;
    out[1].v = std::move(f.gamma);
    out[2].v = std::move(f.lambda);
  };
}

Forcing pair_forcing(const Potential& pot, const PhysParams& params) {
  return [&pot, params](const Blocks& u, Blocks& out) {
    PairForcing f;
    pair_nonlinear(u[0].v.col(0), u[1].v, pot, params, f);
    out = u;
    out[0].v = f.phi;
    out[1].v = std::move(f.sh2);
  };
}

}  // namespace

const char* to_string(Scheme s) { return s == Scheme::lawson_rk4 ? "lawson_rk4" : "rk4"; }

void StepController::validate() const {
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::argument, "time.dt must be positive");
  require(rtol > 0.0, ErrorCode::argument, "time.rtol must be positive");
  require(min_dt > 0.0 && min_dt <= max_dt, ErrorCode::argument, "time.min_dt must lie in (0, max_dt]");
  if (adaptive)
    require(dt >= min_dt && dt <= max_dt, ErrorCode::argument, "time.dt must lie in [min_dt, max_dt]");
}

State step(const State& st, const Potential& pot, double dt, Scheme scheme, const RhsOptions& opts) {
  require(dt > 0.0, ErrorCode::argument, "step: dt must be positive");
  const Blocks out = one_step(pot.grid, to_blocks(st), dt, scheme, gm_forcing(pot, st.params.N, opts));
  if (!all_finite(out)) throw IntegrationError(ErrorCode::numerical_blowup, dt, "step produced non-finite state");
  return from_blocks(out, st);
}

PairState step(const PairState& ps, const Potential& pot, double dt, Scheme scheme) {
  require(dt > 0.0, ErrorCode::argument, "step: dt must be positive");
  const Blocks out = one_step(pot.grid, to_blocks(ps), dt, scheme, pair_forcing(pot, ps.params));
  if (!all_finite(out)) throw IntegrationError(ErrorCode::numerical_blowup, dt, "step produced non-finite state");
  return from_blocks(out, ps);
}

Trajectory<State> evolve(const State& initial, const Potential& pot, double T, const StepController& ctl,
                         const std::vector<double>& sample_times, const Monitor<State>& monitor,
                         const RhsOptions& opts) {
  Trajectory<State> traj{{}, {}, initial};
  auto sink = [&](double t, const Blocks& u, const StepStats& stats) {
    traj.times.push_back(t);
    if (monitor) {
      DiagnosticsRow row = monitor(t, from_blocks(u, initial), stats);
      row.t = t;
      row.dt_used = stats.dt_used;
      row.step_error_estimate = stats.error_estimate;
      traj.rows.push_back(row);
    }
  };
  EngineResult r = run_engine(pot.grid, to_blocks(initial), T, ctl, sample_times,
                              gm_forcing(pot, initial.params.N, opts), sink);
  traj.final_state = from_blocks(r.final_state, initial);
  traj.accepted = r.accepted;
  traj.rejected = r.rejected;
  accumulate_time_integrals(traj.rows);
  return traj;
}

Trajectory<PairState> evolve(const PairState& initial, const Potential& pot, double T,
                             const StepController& ctl, const std::vector<double>& sample_times,
                             const Monitor<PairState>& monitor) {
  Trajectory<PairState> traj{{}, {}, initial};
  auto sink = [&](double t, const Blocks& u, const StepStats& stats) {
    traj.times.push_back(t);
    if (monitor) {
      DiagnosticsRow row = monitor(t, from_blocks(u, initial), stats);
      row.t = t;
      row.dt_used = stats.dt_used;
      row.step_error_estimate = stats.error_estimate;
      traj.rows.push_back(row);
    }
  };
  EngineResult r = run_engine(pot.grid, to_blocks(initial), T, ctl, sample_times,
                              pair_forcing(pot, initial.params), sink);
  traj.final_state = from_blocks(r.final_state, initial);
  traj.accepted = r.accepted;
  traj.rejected = r.rejected;
  accumulate_time_integrals(traj.rows);
  return traj;
}

std::vector<Field> evolve_hartree(const Field& phi0, const Potential& pot, const StepController& ctl,
                                  const std::vector<double>& sample_times) {
  require(!sample_times.empty(), ErrorCode::argument, "evolve_hartree: no sample times");
  const double T = *std::max_element(sample_times.begin(), sample_times.end());
  const Forcing f = [&pot](const Blocks& u, Blocks& out) {
    out = u;
    Eigen::VectorXcd n;
    hartree_nonlinear(u[0].v.col(0), pot, n);
    out[0].v = n;
  };
  std::vector<std::pair<double, Field>> got;
  auto sink = [&](double t, const Blocks& u, const StepStats&) {
    got.emplace_back(t, Field{phi0.grid, u[0].v.col(0)});
  };
  run_engine(pot.grid, {Block{phi0.values, 1, 0, false}}, T, ctl, sample_times, f, sink);
  std::vector<Field> out;
  for (double s : sample_times) {
    auto it = std::find_if(got.begin(), got.end(), [&](const auto& p) { return std::abs(p.first - s) <= 1e-12 * std::max(1.0, T); });
    if (s == 0.0) it = got.begin();
    require(it != got.end(), ErrorCode::argument, "evolve_hartree: sample time outside (0, T]");
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> uniform_samples(double T, int count) {
  require(count >= 1, ErrorCode::argument, "sample count must be positive");
  std::vector<double> s;
  for (int k = 1; k <= count; ++k) s.push_back(T * k / count);
  return s;
}

}  // namespace tdhfb
