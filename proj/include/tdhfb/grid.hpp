#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace tdhfb {

using cplx = std::complex<double>;
using Index = Eigen::Index;

// Discrete Laplacian used by the free propagator and all kinetic terms.
//   spectral: symbol -|xi|^2
//   lattice:  symbol -sum_a (2 - 2 cos(xi_a h)) / h^2  (nearest-neighbour stencil)
enum class LaplacianKind { spectral, lattice };

// Periodic box [-L/2, L/2)^d sampled at M points per axis. Points are ordered
// row-major over axes; frequencies follow the standard FFT ordering
// xi_n = 2 pi n / L, n in {0, ..., M/2 - 1, -M/2, ..., -1}.
class Grid {
 public:
  // Empty placeholder; only assignment and comparison are valid on it.
  Grid() = default;
  static Grid make(int dim, int points_per_axis, double length,
                   LaplacianKind laplacian = LaplacianKind::spectral);

  int dim() const { return data_->dim; }
  int points_per_axis() const { return data_->M; }
  double length() const { return data_->L; }
  double spacing() const { return data_->h; }
  LaplacianKind laplacian() const { return data_->laplacian; }

  // Number of grid points M^d.
  Index size() const { return data_->n; }
  // h^d, the quadrature weight of one point.
  double cell_volume() const { return data_->cell; }

  // Coordinate of point p along axis a.
  double coordinate(Index p, int axis) const;
  // Multi-index component of point p along axis a.
  int axis_index(Index p, int axis) const;
  // Point index of the periodic difference p - q (used for v(x_p - x_q)).
  Index difference_index(Index p, Index q) const;

  const std::vector<double>& axis_frequencies() const { return data_->xi; }
  // Frequency of point p's dual index along axis a.
  double frequency(Index p, int axis) const {
    return data_->xi[static_cast<std::size_t>(axis_index(p, axis))];
  }
  // Laplacian symbol per dual point (non-positive).
  const Eigen::VectorXd& laplacian_symbol() const { return data_->lap; }
  // Per-axis Laplacian symbol on one axis (length M).
  const Eigen::VectorXd& axis_laplacian_symbol() const { return data_->lap_axis; }

  bool operator==(const Grid& o) const;
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  struct Data {
    int dim;
    int M;
    double L;
    double h;
    double cell;
    Index n;
    LaplacianKind laplacian;
    std::vector<double> xi;
    Eigen::VectorXd lap_axis;
    Eigen::VectorXd lap;
  };
  explicit Grid(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

// One complex value per grid point.
struct Field {
  Grid grid;
  Eigen::VectorXcd values;

  static Field zeros(const Grid& g) { return {g, Eigen::VectorXcd::Zero(g.size())}; }
};

enum class Symmetry { none, symmetric, hermitian };

// Two-point function K(x_i, x_j) stored as a size() x size() matrix.
struct Kernel {
  Grid grid;
  Eigen::MatrixXcd values;
  Symmetry symmetry = Symmetry::none;

  static Kernel zeros(const Grid& g, Symmetry s = Symmetry::none) {
    return {g, Eigen::MatrixXcd::Zero(g.size(), g.size()), s};
  }
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// ||.||_{L^2}: (h^d sum |f|^2)^{1/2} and (h^{2d} sum |K|^2)^{1/2}.
double l2_norm(const Field& f);
double l2_norm(const Kernel& k);

// ||K - K^T||_F / ||K||_F and ||K - K^dagger||_F / ||K||_F (0 for K = 0).
double symmetry_residual(const Eigen::MatrixXcd& k);
double hermiticity_residual(const Eigen::MatrixXcd& k);

// Symbols receive the frequency vector of one axis group (length d).
using FieldSymbol = std::function<cplx(std::span<const double> xi)>;
using KernelSymbol = std::function<cplx(std::span<const double> xi, std::span<const double> eta)>;

enum class KernelAxes { x, y, both };

// inverse-FFT(symbol * FFT(f)). Throws numeric_domain on a non-finite symbol.
Field fourier_multiplier(const Field& f, const FieldSymbol& symbol);
// Multiplier over the selected kernel axes; the unselected frequency argument
// is passed as zeros.
Kernel fourier_multiplier(const Kernel& k, const KernelSymbol& symbol, KernelAxes axes);

// exp(i t s1 Lap_x [+ i t s2 Lap_y]); s_i in {+1, -1}.
Field free_propagator(const Field& f, double t, int s1);
Kernel free_propagator(const Kernel& k, double t, int s1, int s2);

// In-place variants on raw storage, used on the integrator hot path.
void apply_free_propagator(const Grid& g, Eigen::Ref<Eigen::VectorXcd> f, double t, int s1);
void apply_free_propagator(const Grid& g, Eigen::MatrixXcd& k, double t, int s1, int s2);
// Multiply by the Laplacian symbol (s1 Lap_x + s2 Lap_y).
void apply_laplacian(const Grid& g, Eigen::Ref<Eigen::VectorXcd> f, int s1);
void apply_laplacian(const Grid& g, Eigen::MatrixXcd& k, int s1, int s2);

// ||<grad>^s f|| (inhomogeneous, multiplier (1+|xi|^2)^{s/2}) or ||grad|^s f||
// (homogeneous, |xi|^s). For kernels the multiplier acts on both axes.
double frac_sobolev_norm(const Field& f, double s, bool inhomogeneous);
double frac_sobolev_norm(const Kernel& k, double s, bool inhomogeneous);

// Dense matrix of the Laplacian on the grid (size() x size(), real).
Eigen::MatrixXd laplacian_matrix(const Grid& g);

}  // namespace tdhfb
