#include "tdhfb/model.hpp"

#include "fft.hpp"
#include "tdhfb/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tdhfb {

void PhysParams::validate() const {
  require(std::isfinite(N) && N > 0.0, ErrorCode::argument, "N must be positive");
  require(beta >= 0.0 && beta < 2.0 / 3.0, ErrorCode::argument, "beta must lie in [0, 2/3)");
  require(dim == 1 || dim == 2, ErrorCode::argument, "dimension must be 1 or 2");
}

double GaussianProfile::operator()(double r2) const {
  return strength * std::exp(-r2 / (2.0 * sigma * sigma));
}

double GaussianProfile::integral(int dim) const {
  return strength * std::pow(2.0 * std::numbers::pi * sigma * sigma, 0.5 * dim);
}

namespace {

// sum_m exp(-(s + m L)^2 / (2 w^2)) and the same without images.
std::pair<double, double> periodized_gaussian(double s, double L, double w) {
  const double c = 1.0 / (2.0 * w * w);
  const double plain = std::exp(-s * s * c);
  double total = plain;
  for (int m = 1; m < 100000; ++m) {
    const double a = std::exp(-(s + m * L) * (s + m * L) * c);
    const double b = std::exp(-(s - m * L) * (s - m * L) * c);
    total += a + b;
    if (a + b < 1e-17 * total && std::abs(m * L) > std::abs(s)) break;
  }
  return {total, plain};
}

}  // namespace

Potential scale_potential(const GaussianProfile& profile, const PhysParams& params, const Grid& grid) {
  params.validate();
  require(params.dim == grid.dim(), ErrorCode::argument, "potential: dimension differs from grid");
  require(profile.sigma > 0.0 && std::isfinite(profile.sigma), ErrorCode::argument,
          "potential sigma must be positive");
  require(profile.strength >= 0.0 && std::isfinite(profile.strength), ErrorCode::argument,
          "potential strength must be non-negative");

  Potential pot;
  pot.grid = grid;
  pot.profile = profile;
  const int d = grid.dim();
  const int M = grid.points_per_axis();
  const double L = grid.length();
  pot.scale = std::pow(params.N, params.beta);
  pot.amplitude = std::pow(params.N, d * params.beta);
  const double w = profile.sigma / pot.scale;
  const double peak = pot.amplitude * profile.strength;

  std::vector<double> axis_total(static_cast<std::size_t>(M)), axis_plain(static_cast<std::size_t>(M));
  for (int q = 0; q < M; ++q) {
    const double s = (q < M / 2 ? q : q - M) * grid.spacing();
    const auto [t, p] = periodized_gaussian(s, L, w);
    axis_total[static_cast<std::size_t>(q)] = t;
    axis_plain[static_cast<std::size_t>(q)] = p;
  }

  const Index n = grid.size();
  pot.samples.resize(n);
  for (Index q = 0; q < n; ++q) {
    double t = 1.0, p = 1.0;
    for (int a = 0; a < d; ++a) {
      t *= axis_total[static_cast<std::size_t>(grid.axis_index(q, a))];
      p *= axis_plain[static_cast<std::size_t>(grid.axis_index(q, a))];
    }
    // Tails below 1e-40 of the peak are stored as zero.
    pot.samples[q] = t < 1e-40 ? 0.0 : peak * t;
    if (peak > 0.0) pot.wrap_correction = std::max(pot.wrap_correction, (t - p));
  }
  if (pot.wrap_correction > 1e-6)
    fail(ErrorCode::domain_too_small,
         "potential width " + std::to_string(w) + " is too large for box length " + std::to_string(L) +
             " (periodic image correction " + std::to_string(pot.wrap_correction) + " of peak)");

  pot.pair.resize(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) pot.pair(i, j) = pot.samples[grid.difference_index(i, j)];

  pot.spectrum = pot.samples.cast<cplx>();
  detail::fft_columns(d, M, pot.spectrum.data(), 1, detail::Direction::forward);
  pot.spectrum *= grid.cell_volume();
  return pot;
}

Reconstruction reconstruct(const PairState& ps) {
  const Grid& g = ps.phi.grid;
  require_same_grid(g, ps.sh2.grid, "reconstruct_state");
  Reconstruction r{{}, k_from_sh2(ps.sh2), {}};
  r.shbar_sh = kernel_from_factors(
      r.k, [](double s) { const double v = std::sinh(s); return v * v; }, true, Symmetry::hermitian);

  const double invN = 1.0 / ps.params.N;
  const Eigen::VectorXcd& phi = ps.phi.values;
  Kernel gamma{g, phi.conjugate() * phi.transpose() + invN * r.shbar_sh.values, Symmetry::hermitian};
  gamma.values = 0.5 * (gamma.values + gamma.values.adjoint()).eval();
  Kernel lambda{g, phi * phi.transpose() + (0.5 * invN) * ps.sh2.values, Symmetry::symmetric};
  lambda.values = 0.5 * (lambda.values + lambda.values.transpose()).eval();
  r.state = State{ps.phi, std::move(gamma), std::move(lambda), ps.params};
  return r;
}

State reconstruct_state(const PairState& ps) { return reconstruct(ps).state; }

Kernel initial_pair_kernel(const Grid& g, const InitialConfig& cfg) {
  const Index n = g.size();
  const int d = g.dim();
  Kernel k = Kernel::zeros(g, Symmetry::symmetric);
  if (cfg.k.amp == 0.0) return k;
  const double s2 = 2.0 * cfg.k.width_rel * cfg.k.width_rel;
  const double w2 = 2.0 * cfg.k.width_com * cfg.k.width_com;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      double rel = 0.0, com = 0.0;
      for (int a = 0; a < d; ++a) {
        const double x = g.coordinate(i, a), y = g.coordinate(j, a);
        rel += (x - y) * (x - y);
        const double c = 0.5 * (x + y) - cfg.phi.center;
        com += c * c;
      }
      k.values(i, j) = cfg.k.amp * std::exp(-rel / s2 - com / w2);
    }
  }
  k.values = 0.5 * (k.values + k.values.transpose()).eval();
  return k;
}

PairState initial_data(const Grid& g, const PhysParams& params, const InitialConfig& cfg) {
  params.validate();
  require(params.dim == g.dim(), ErrorCode::argument, "initial data: dimension differs from grid");
  const double limit = g.length() / 8.0;
  auto check_width = [&](double w, const char* name) {
    require(w > 0.0 && std::isfinite(w), ErrorCode::argument, std::string(name) + " must be positive");
    if (w > limit)
      fail(ErrorCode::domain_too_small, std::string(name) + " = " + std::to_string(w) +
                                            " exceeds L/8 = " + std::to_string(limit));
  };
  check_width(cfg.phi.width, "init.phi.width");
  if (cfg.k.amp != 0.0) {
    check_width(cfg.k.width_rel, "init.k.width_rel");
    check_width(cfg.k.width_com, "init.k.width_com");
  }
  require(cfg.phi.amp != 0.0, ErrorCode::argument, "init.phi.amp must be non-zero");

  PairState ps{Field::zeros(g), Kernel::zeros(g, Symmetry::symmetric), params};
  const double w2 = 2.0 * cfg.phi.width * cfg.phi.width;
  for (Index p = 0; p < g.size(); ++p) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double c = g.coordinate(p, a) - cfg.phi.center;
      r2 += c * c;
    }
    ps.phi.values[p] = std::polar(cfg.phi.amp * std::exp(-r2 / w2), cfg.phi.momentum * g.coordinate(p, 0));
  }

  double pair_number = 0.0;
  if (cfg.k.amp != 0.0) {
    const TakagiFactors tf = takagi(initial_pair_kernel(g, cfg));
    ps.sh2 = double_angle(tf).sh2;
    pair_number = tf.sigma.array().sinh().square().sum();
  }
  const double target = 1.0 - pair_number / params.N;
  if (!(target > 0.0))
    fail(ErrorCode::argument, "init.k.amp too large: pair excitations alone exceed N particles");
  ps.phi.values *= std::sqrt(target) / l2_norm(ps.phi);
  return ps;
}

}  // namespace tdhfb
