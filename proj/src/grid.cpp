#include "tdhfb/grid.hpp"

#include "fft.hpp"
#include "tdhfb/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tdhfb {

using detail::Direction;

Grid Grid::make(int dim, int points_per_axis, double length, LaplacianKind laplacian) {
  require(dim == 1 || dim == 2, ErrorCode::argument, "grid dimension must be 1 or 2");
  const int M = points_per_axis;
  require(M >= 2 && (M & (M - 1)) == 0, ErrorCode::argument,
          "points per axis must be a power of two >= 2, got " + std::to_string(M));
  require(std::isfinite(length) && length > 0.0, ErrorCode::argument, "box length must be positive");

  auto d = std::make_shared<Data>();
  d->dim = dim;
  d->M = M;
  d->L = length;
  d->h = length / M;
  d->cell = std::pow(d->h, dim);
  d->n = 1;
  for (int a = 0; a < dim; ++a) d->n *= M;
  d->laplacian = laplacian;

  d->xi.resize(static_cast<std::size_t>(M));
  d->lap_axis.resize(M);
  for (int j = 0; j < M; ++j) {
    const int k = j < M / 2 ? j : j - M;
    const double xi = 2.0 * std::numbers::pi * k / length;
    d->xi[static_cast<std::size_t>(j)] = xi;
    d->lap_axis[j] = laplacian == LaplacianKind::spectral
                         ? -xi * xi
                         : -(2.0 - 2.0 * std::cos(xi * d->h)) / (d->h * d->h);
  }
  d->lap.setZero(d->n);
  Grid g(d);
  auto& lap = const_cast<Eigen::VectorXd&>(d->lap);
  for (Index p = 0; p < d->n; ++p)
    for (int a = 0; a < dim; ++a) lap[p] += d->lap_axis[g.axis_index(p, a)];
  return g;
}

int Grid::axis_index(Index p, int axis) const {
  Index stride = 1;
  for (int a = data_->dim - 1; a > axis; --a) stride *= data_->M;
  return static_cast<int>((p / stride) % data_->M);
}

double Grid::coordinate(Index p, int axis) const {
  return -0.5 * data_->L + axis_index(p, axis) * data_->h;
}

Index Grid::difference_index(Index p, Index q) const {
  Index out = 0;
  for (int a = 0; a < data_->dim; ++a) {
    const int M = data_->M;
    const int diff = ((axis_index(p, a) - axis_index(q, a)) % M + M) % M;
    out = out * M + diff;
  }
  return out;
}

bool Grid::operator==(const Grid& o) const {
  if (data_ == o.data_) return true;
  if (!data_ || !o.data_) return false;
  return data_->dim == o.data_->dim && data_->M == o.data_->M && data_->L == o.data_->L &&
         data_->laplacian == o.data_->laplacian;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) fail(ErrorCode::grid_mismatch, std::string(what) + ": operands live on different grids");
}

double l2_norm(const Field& f) {
  return std::sqrt(f.grid.cell_volume()) * f.values.norm();
}

double l2_norm(const Kernel& k) {
  return k.grid.cell_volume() * k.values.norm();
}

double symmetry_residual(const Eigen::MatrixXcd& k) {
  const double n = k.norm();
  return n == 0.0 ? 0.0 : (k - k.transpose()).norm() / n;
}

double hermiticity_residual(const Eigen::MatrixXcd& k) {
  const double n = k.norm();
  return n == 0.0 ? 0.0 : (k - k.adjoint()).norm() / n;
}

namespace {

std::vector<double> frequency_vector(const Grid& g, Index p) {
  std::vector<double> xi(static_cast<std::size_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) xi[static_cast<std::size_t>(a)] = g.frequency(p, a);
  return xi;
}

cplx checked(cplx v) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    fail(ErrorCode::numeric_domain, "Fourier symbol is not finite on the grid frequency lattice");
  return v;
}

Eigen::VectorXd propagator_phase_arg(const Grid& g, double t, int s) {
  return (t * s) * g.laplacian_symbol();
}

}  // namespace

Field fourier_multiplier(const Field& f, const FieldSymbol& symbol) {
  const Grid& g = f.grid;
  Field out = f;
  detail::fft_columns(g.dim(), g.points_per_axis(), out.values.data(), 1, Direction::forward);
  for (Index p = 0; p < g.size(); ++p) {
    const auto xi = frequency_vector(g, p);
    out.values[p] *= checked(symbol(xi));
  }
  detail::fft_columns(g.dim(), g.points_per_axis(), out.values.data(), 1, Direction::backward);
  out.values /= static_cast<double>(g.size());
  return out;
}

Kernel fourier_multiplier(const Kernel& k, const KernelSymbol& symbol, KernelAxes axes) {
  const Grid& g = k.grid;
  const int d = g.dim();
  const int M = g.points_per_axis();
  const Index n = g.size();
  Kernel out{g, k.values, Symmetry::none};
  auto forward = [&](Direction dir) {
    switch (axes) {
      case KernelAxes::x: detail::fft_columns(d, M, out.values.data(), n, dir); break;
      case KernelAxes::y: detail::fft_rows(d, M, out.values.data(), dir); break;
      case KernelAxes::both: detail::fft_both(d, M, out.values.data(), dir); break;
    }
  };
  forward(Direction::forward);
  const std::vector<double> zeros(static_cast<std::size_t>(d), 0.0);
  for (Index j = 0; j < n; ++j) {
    const auto eta = axes == KernelAxes::x ? zeros : frequency_vector(g, j);
    for (Index i = 0; i < n; ++i) {
      const auto xi = axes == KernelAxes::y ? zeros : frequency_vector(g, i);
      out.values(i, j) *= checked(symbol(xi, eta));
    }
  }
  forward(Direction::backward);
  out.values /= axes == KernelAxes::both ? static_cast<double>(n) * static_cast<double>(n)
                                         : static_cast<double>(n);
  return out;
}

void apply_free_propagator(const Grid& g, Eigen::Ref<Eigen::VectorXcd> f, double t, int s1) {
  detail::fft_columns(g.dim(), g.points_per_axis(), f.data(), 1, Direction::forward);
  const Eigen::VectorXd arg = propagator_phase_arg(g, t, s1);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (Index p = 0; p < g.size(); ++p) f[p] *= std::polar(scale, arg[p]);
  detail::fft_columns(g.dim(), g.points_per_axis(), f.data(), 1, Direction::backward);
}

void apply_free_propagator(const Grid& g, Eigen::MatrixXcd& k, double t, int s1, int s2) {
  const Index n = g.size();
  detail::fft_both(g.dim(), g.points_per_axis(), k.data(), Direction::forward);
  const Eigen::VectorXd a1 = propagator_phase_arg(g, t, s1);
  const Eigen::VectorXd a2 = propagator_phase_arg(g, t, s2);
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  Eigen::VectorXcd e1(n), e2(n);
  for (Index p = 0; p < n; ++p) {
    e1[p] = std::polar(scale, a1[p]);
    e2[p] = std::polar(1.0, a2[p]);
  }
  for (Index j = 0; j < n; ++j) k.col(j).array() *= e1.array() * e2[j];
  detail::fft_both(g.dim(), g.points_per_axis(), k.data(), Direction::backward);
}

void apply_laplacian(const Grid& g, Eigen::Ref<Eigen::VectorXcd> f, int s1) {
  detail::fft_columns(g.dim(), g.points_per_axis(), f.data(), 1, Direction::forward);
  f.array() *= (s1 / static_cast<double>(g.size())) * g.laplacian_symbol().array();
  detail::fft_columns(g.dim(), g.points_per_axis(), f.data(), 1, Direction::backward);
}

void apply_laplacian(const Grid& g, Eigen::MatrixXcd& k, int s1, int s2) {
  const Index n = g.size();
  detail::fft_both(g.dim(), g.points_per_axis(), k.data(), Direction::forward);
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  const Eigen::VectorXd& lap = g.laplacian_symbol();
  for (Index j = 0; j < n; ++j)
    k.col(j).array() *= scale * (s1 * lap.array() + s2 * lap[j]);
  detail::fft_both(g.dim(), g.points_per_axis(), k.data(), Direction::backward);
}

Field free_propagator(const Field& f, double t, int s1) {
  Field out = f;
  apply_free_propagator(f.grid, out.values, t, s1);
  return out;
}

Kernel free_propagator(const Kernel& k, double t, int s1, int s2) {
  Kernel out = k;
  apply_free_propagator(k.grid, out.values, t, s1, s2);
  return out;
}

namespace {

Eigen::VectorXd sobolev_weights(const Grid& g, double s, bool inhomogeneous) {
  require(s >= 0.0 && std::isfinite(s), ErrorCode::argument, "Sobolev order must be non-negative");
  Eigen::VectorXd w(g.size());
  for (Index p = 0; p < g.size(); ++p) {
    double xi2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) xi2 += g.frequency(p, a) * g.frequency(p, a);
    w[p] = inhomogeneous ? std::pow(1.0 + xi2, 0.5 * s) : (s == 0.0 ? 1.0 : std::pow(xi2, 0.5 * s));
  }
  return w;
}

}  // namespace

double frac_sobolev_norm(const Field& f, double s, bool inhomogeneous) {
  const Grid& g = f.grid;
  Eigen::VectorXcd hat = f.values;
  detail::fft_columns(g.dim(), g.points_per_axis(), hat.data(), 1, Direction::forward);
  const Eigen::VectorXd w = sobolev_weights(g, s, inhomogeneous);
  const double sum = (w.array() * hat.array().abs()).square().sum();
  return std::sqrt(g.cell_volume() * sum / static_cast<double>(g.size()));
}

double frac_sobolev_norm(const Kernel& k, double s, bool inhomogeneous) {
  const Grid& g = k.grid;
  const Index n = g.size();
  Eigen::MatrixXcd hat = k.values;
  detail::fft_both(g.dim(), g.points_per_axis(), hat.data(), Direction::forward);
  const Eigen::VectorXd w = sobolev_weights(g, s, inhomogeneous);
  double sum = 0.0;
  for (Index j = 0; j < n; ++j) sum += (w.array() * w[j] * hat.col(j).array().abs()).square().sum();
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return g.cell_volume() * std::sqrt(sum / nn);
}

Eigen::MatrixXd laplacian_matrix(const Grid& g) {
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(g.size(), g.size());
  detail::fft_columns(g.dim(), g.points_per_axis(), id.data(), g.size(), Direction::forward);
  for (Index j = 0; j < g.size(); ++j) id.col(j).array() *= g.laplacian_symbol().array();
  detail::fft_columns(g.dim(), g.points_per_axis(), id.data(), g.size(), Direction::backward);
  return id.real() / static_cast<double>(g.size());
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::argument: return "argument";
    case ErrorCode::numeric_domain: return "numeric-domain";
    case ErrorCode::symmetry_violation: return "symmetry-violation";
    case ErrorCode::domain_too_small: return "domain-too-small";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::numerical_blowup: return "numerical-blowup";
    case ErrorCode::stiffness: return "stiffness";
    case ErrorCode::fit: return "fit";
    case ErrorCode::truncation_insufficient: return "truncation-insufficient";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace tdhfb
