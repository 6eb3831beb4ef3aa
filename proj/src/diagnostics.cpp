#include "tdhfb/diagnostics.hpp"

#include "fft.hpp"
#include "tdhfb/errors.hpp"

#include <cmath>

namespace tdhfb {

namespace {

using detail::Direction;

// <f, -Lap f> using the grid's Laplacian symbol.
double kinetic(const Field& f) {
  const Grid& g = f.grid;
  Eigen::VectorXcd hat = f.values;
  detail::fft_columns(g.dim(), g.points_per_axis(), hat.data(), 1, Direction::forward);
  const double s = (-g.laplacian_symbol().array() * hat.array().abs2()).sum();
  return g.cell_volume() * s / static_cast<double>(g.size());
}

// ||grad_x K||^2 + ||grad_y K||^2 with the grid's Laplacian symbol.
double kinetic(const Kernel& k) {
  const Grid& g = k.grid;
  const Index n = g.size();
  Eigen::MatrixXcd hat = k.values;
  detail::fft_both(g.dim(), g.points_per_axis(), hat.data(), Direction::forward);
  const Eigen::VectorXd& lap = g.laplacian_symbol();
  double s = 0.0;
  for (Index j = 0; j < n; ++j) s += ((-lap.array() - lap[j]) * hat.col(j).array().abs2()).sum();
  const double h = g.cell_volume();
  return h * h * s / (static_cast<double>(n) * static_cast<double>(n));
}

// sum_{x,y} V(x,y) sum_z |phi(x) sh(y,z) + phi(y) sh(x,z)|^2, by direct summation.
double triple_sum(const Eigen::VectorXcd& phi, const Eigen::MatrixXcd& sh, const Eigen::MatrixXd& V) {
  const Index n = phi.size();
  double total = 0.0;
  Eigen::MatrixXcd a(n, n);
  for (Index x = 0; x < n; ++x) {
    // a(y, z) = phi(x) sh(y, z) + phi(y) sh(x, z)
    a.noalias() = phi[x] * sh;
    a.noalias() += phi * sh.row(x);
    total += V.col(x).dot(a.rowwise().squaredNorm());
  }
  return total;
}

Index shifted(const Grid& g, Index p, Index z) {
  Index out = 0;
  const int M = g.points_per_axis();
  for (int a = 0; a < g.dim(); ++a) out = out * M + (g.axis_index(p, a) + g.axis_index(z, a)) % M;
  return out;
}

double trace_real(const Eigen::MatrixXcd& k) { return k.diagonal().real().sum(); }

struct PairPieces {
  Reconstruction r;
  Kernel sh;
};

PairPieces pair_pieces(const PairState& ps) {
  Reconstruction r = reconstruct(ps);
  Kernel sh = hyperbolic_calculus(r.k).sh;
  return {std::move(r), std::move(sh)};
}

double pair_energy(const PairState& ps, const Potential& pot, const PairPieces& pp, bool printed) {
  const Grid& g = ps.phi.grid;
  const double h = g.cell_volume();
  const double N = ps.params.N;
  const Eigen::VectorXcd& phi = ps.phi.values;
  const State& st = pp.r.state;

  const double kin = kinetic(ps.phi) + kinetic(pp.sh) / (2.0 * N);
  const double triple = h * h * h * triple_sum(phi, pp.sh.values, pot.pair) / (2.0 * N);

  double quartic = 0.0;
  if (printed) {
    const Eigen::VectorXd rho = st.gamma.values.diagonal().real();
    const Eigen::ArrayXXd w = 2.0 * st.lambda.values.array().abs2() + st.gamma.values.array().abs2() +
                              (rho * rho.transpose()).array();
    quartic = 0.25 * h * h * (pot.pair.array() * w).sum();
  } else {
    const Eigen::MatrixXcd gp = pp.r.shbar_sh.values / N;
    const Eigen::VectorXd rho = gp.diagonal().real();
    const Eigen::ArrayXXd w =
        st.lambda.values.array().abs2() + gp.array().abs2() + (rho * rho.transpose()).array();
    quartic = 0.5 * h * h * (pot.pair.array() * w).sum();
  }
  return N * (kin + triple + quartic);
}

}  // namespace

const std::vector<std::string>& DiagnosticsRow::columns() {
  static const std::vector<std::string> c{
      "t",           "particle_number",    "energy",         "tr_gamma",
      "phi_l2",      "sobolev_phi",        "sobolev_gamma",  "sobolev_lambda",
      "diag_shift_lambda", "grad2_lambda", "hermiticity_residual", "symmetry_residual",
      "dt_used",     "step_error_estimate", "phi_lq",        "cum_phi_lq_sq",
      "cum_diag_shift_lambda_sq"};
  return c;
}

std::vector<double> DiagnosticsRow::values() const {
  return {t,           particle_number,     energy,        tr_gamma,
          phi_l2,      sobolev_phi,         sobolev_gamma, sobolev_lambda,
          diag_shift_lambda, grad2_lambda,  hermiticity_residual, symmetry_residual,
          dt_used,     step_error_estimate, phi_lq,        cum_phi_lq_sq,
          cum_diag_shift_lambda_sq};
}

double particle_number(const PairState& ps) {
  const double N = ps.params.N;
  const TakagiFactors tf = k_from_sh2(ps.sh2);
  const double sh_sq = tf.sigma.array().sinh().square().sum();
  const double phi_sq = l2_norm(ps.phi) * l2_norm(ps.phi);
  return N * (phi_sq + sh_sq / N);
}

double particle_number(const State& st) {
  return st.params.N * st.gamma.grid.cell_volume() * trace_real(st.gamma.values);
}

double energy(const PairState& ps, const Potential& pot) {
  require_same_grid(ps.phi.grid, pot.grid, "energy");
  return pair_energy(ps, pot, pair_pieces(ps), false);
}

double energy_printed_form(const PairState& ps, const Potential& pot) {
  require_same_grid(ps.phi.grid, pot.grid, "energy");
  return pair_energy(ps, pot, pair_pieces(ps), true);
}

double energy(const State& st, const Potential& pot) {
  require_same_grid(st.gamma.grid, pot.grid, "energy");
  const Grid& g = st.gamma.grid;
  const double h = g.cell_volume();
  const double N = st.params.N;
  const Eigen::MatrixXd D = laplacian_matrix(g);
  // Tr(-Lap Gamma): the Laplacian acts on the annihilation variable.
  const double kin = -h * (st.gamma.values.array() * D.transpose().array()).sum().real();
  const Eigen::VectorXd rho = st.gamma.values.diagonal().real();
  const Eigen::VectorXd c = st.phi.values.array().abs2();
  const Eigen::ArrayXXd w = st.lambda.values.array().abs2() + st.gamma.values.array().abs2() +
                            (rho * rho.transpose()).array() - 2.0 * (c * c.transpose()).array();
  return N * kin + 0.5 * N * h * h * (pot.pair.array() * w).sum();
}

double diag_shift_norm(const Kernel& lambda, double s) {
  const Grid& g = lambda.grid;
  const Index n = g.size();
  Eigen::MatrixXcd f(n, n);
  for (Index z = 0; z < n; ++z)
    for (Index i = 0; i < n; ++i) f(i, z) = lambda.values(shifted(g, i, z), i);
  detail::fft_columns(g.dim(), g.points_per_axis(), f.data(), n, Direction::forward);
  Eigen::VectorXd w(n);
  for (Index p = 0; p < n; ++p) {
    double xi2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) xi2 += g.frequency(p, a) * g.frequency(p, a);
    w[p] = std::pow(1.0 + xi2, s);
  }
  double best = 0.0;
  for (Index z = 0; z < n; ++z) best = std::max(best, (w.array() * f.col(z).array().abs2()).sum());
  return std::sqrt(g.cell_volume() * best / static_cast<double>(n));
}

double lebesgue_norm(const Field& f, double q) {
  require(q >= 1.0, ErrorCode::argument, "Lebesgue exponent must be >= 1");
  if (std::isinf(q)) return f.values.cwiseAbs().maxCoeff();
  const double s = f.values.cwiseAbs().array().pow(q).sum();
  return std::pow(f.grid.cell_volume() * s, 1.0 / q);
}

void norm_monitors(const State& st, const MonitorConfig& cfg, DiagnosticsRow& row) {
  const double s = cfg.order(st.params);
  require(s >= 0.0, ErrorCode::argument, "Sobolev order must be non-negative");
  row.tr_gamma = st.gamma.grid.cell_volume() * trace_real(st.gamma.values);
  row.phi_l2 = l2_norm(st.phi);
  row.sobolev_phi = frac_sobolev_norm(st.phi, s, true);
  row.sobolev_gamma = frac_sobolev_norm(st.gamma, s, false);
  row.sobolev_lambda = frac_sobolev_norm(st.lambda, s, true);
  row.grad2_lambda =
      frac_sobolev_norm(st.lambda, 1.0, false) * std::pow(st.params.N, -4.0 * st.params.beta);
  row.diag_shift_lambda = diag_shift_norm(st.lambda, s);
  row.hermiticity_residual = hermiticity_residual(st.gamma.values);
  row.symmetry_residual = symmetry_residual(st.lambda.values);
  row.phi_lq = lebesgue_norm(st.phi, cfg.lebesgue_exponent);
}

DiagnosticsRow diagnostics_row(double t, const State& st, const Potential& pot, const MonitorConfig& cfg) {
  DiagnosticsRow row;
  row.t = t;
  row.particle_number = particle_number(st);
  if (cfg.energy) row.energy = energy(st, pot);
  norm_monitors(st, cfg, row);
  return row;
}

DiagnosticsRow diagnostics_row(double t, const PairState& ps, const Potential& pot,
                               const MonitorConfig& cfg) {
  DiagnosticsRow row;
  row.t = t;
  const PairPieces pp = pair_pieces(ps);
  row.particle_number = particle_number(ps);
  if (cfg.energy) row.energy = pair_energy(ps, pot, pp, false);
  norm_monitors(pp.r.state, cfg, row);
  return row;
}

void accumulate_time_integrals(std::vector<DiagnosticsRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k == 0) {
      rows[k].cum_phi_lq_sq = 0.0;
      rows[k].cum_diag_shift_lambda_sq = 0.0;
      continue;
    }
    const auto& a = rows[k - 1];
    auto& b = rows[k];
    const double dt = b.t - a.t;
    b.cum_phi_lq_sq = a.cum_phi_lq_sq + 0.5 * dt * (a.phi_lq * a.phi_lq + b.phi_lq * b.phi_lq);
    b.cum_diag_shift_lambda_sq =
        a.cum_diag_shift_lambda_sq +
        0.5 * dt * (a.diag_shift_lambda * a.diag_shift_lambda + b.diag_shift_lambda * b.diag_shift_lambda);
  }
}

GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& value, double t_min,
                     double t_max) {
  require(t.size() == value.size(), ErrorCode::argument, "growth_fit: series lengths differ");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_min || t[k] > t_max || t[k] <= 0.0) continue;
    if (!(value[k] > 0.0)) fail(ErrorCode::fit, "growth_fit: values must be positive");
    xs.push_back(std::log(t[k]));
    ys.push_back(std::log(value[k]));
  }
  const auto m = static_cast<double>(xs.size());
  if (xs.size() < 8)
    fail(ErrorCode::fit, "growth_fit: need at least 8 samples in the window, got " + std::to_string(xs.size()));
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::fit, "growth_fit: window has no spread in t");
  GrowthFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  double ssr = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - my - fit.exponent * (xs[k] - mx);
    ssr += r * r;
  }
  fit.std_error = std::sqrt(ssr / (m - 2.0) / sxx);
  fit.samples = static_cast<int>(xs.size());
  return fit;
}

DriftReport drift_report(const std::vector<DiagnosticsRow>& rows, double threshold) {
  require(rows.size() >= 2, ErrorCode::argument, "drift_report: need at least two rows");
  DriftReport rep;
  rep.threshold = threshold;
  const double n0 = rows.front().particle_number;
  const double e0 = rows.front().energy;
  const double ne = std::abs(n0) > 0.0 ? std::abs(n0) : 1.0;
  const double ee = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
  for (const auto& r : rows) {
    rep.number_drift = std::max(rep.number_drift, std::abs(r.particle_number - n0) / ne);
    rep.energy_drift = std::max(rep.energy_drift, std::abs(r.energy - e0) / ee);
  }
  rep.passed = rep.number_drift <= threshold && rep.energy_drift <= threshold;
  return rep;
}

}  // namespace tdhfb
