#include "tdhfb/fock.hpp"

#include "tdhfb/errors.hpp"

#include <cmath>
#include <map>
#include <string>

namespace tdhfb {

namespace {

void compositions(int remaining, int site, int sites, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (site == sites - 1) {
    cur[static_cast<std::size_t>(site)] = remaining;
    out.push_back(cur);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur[static_cast<std::size_t>(site)] = k;
    compositions(remaining - k, site + 1, sites, cur, out);
  }
}

constexpr double kTailLimit = 1e-8;

}  // namespace

std::shared_ptr<const FockBasis> FockBasis::make(int sites, int n_max) {
  require(sites >= 1, ErrorCode::argument, "Fock basis needs at least one site");
  require(n_max >= 0, ErrorCode::argument, "Fock cutoff n_max must be non-negative");
  auto b = std::make_shared<FockBasis>();
  b->sites_ = sites;
  b->n_max_ = n_max;
  std::vector<int> cur(static_cast<std::size_t>(sites), 0);
  for (int n = 0; n <= n_max; ++n) {
    b->begin_.push_back(static_cast<Index>(b->states_.size()));
    compositions(n, 0, sites, cur, b->states_);
  }
  b->begin_.push_back(static_cast<Index>(b->states_.size()));

  std::map<std::vector<int>, Index> lookup;
  for (std::size_t i = 0; i < b->states_.size(); ++i) {
    lookup.emplace(b->states_[i], static_cast<Index>(i));
    int total = 0;
    for (int v : b->states_[i]) total += v;
    b->sector_.push_back(total);
  }
  b->up_.assign(static_cast<std::size_t>(sites), std::vector<Index>(b->states_.size(), -1));
  b->down_.assign(static_cast<std::size_t>(sites), std::vector<Index>(b->states_.size(), -1));
  for (std::size_t i = 0; i < b->states_.size(); ++i) {
    for (int j = 0; j < sites; ++j) {
      std::vector<int> occ = b->states_[i];
      auto& nj = occ[static_cast<std::size_t>(j)];
      ++nj;
      if (auto it = lookup.find(occ); it != lookup.end()) b->up_[static_cast<std::size_t>(j)][i] = it->second;
      nj -= 2;
      if (nj >= 0)
        if (auto it = lookup.find(occ); it != lookup.end()) b->down_[static_cast<std::size_t>(j)][i] = it->second;
    }
  }
  return b;
}

Index FockBasis::index_of(const std::vector<int>& occupation) const {
  require(static_cast<int>(occupation.size()) == sites_, ErrorCode::argument, "occupation has wrong length");
  int n = 0;
  for (int v : occupation) {
    require(v >= 0, ErrorCode::argument, "negative occupation");
    n += v;
  }
  if (n > n_max_) return -1;
  for (Index i = sector_begin(n); i < sector_begin(n) + sector_size(n); ++i)
    if (states_[static_cast<std::size_t>(i)] == occupation) return i;
  return -1;
}

double FockVector::truncation_tail() const {
  double tail = 0.0;
  const int cut = basis->n_max() - 2;
  for (Index i = 0; i < basis->dimension(); ++i)
    if (basis->sector(i) >= cut) tail += std::norm(amplitudes[i]);
  return tail;
}

Eigen::SparseMatrix<cplx> annihilator(const FockBasis& basis, int site) {
  const Index n = basis.dimension();
  std::vector<Eigen::Triplet<cplx>> t;
  for (Index i = 0; i < n; ++i) {
    const Index to = basis.lowered(i, site);
    if (to >= 0) t.emplace_back(to, i, std::sqrt(static_cast<double>(basis.occupation(i)[static_cast<std::size_t>(site)])));
  }
  Eigen::SparseMatrix<cplx> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

LadderOps ladder_ops(const FockBasisPtr& basis) {
  LadderOps ops;
  for (int j = 0; j < basis->sites(); ++j) {
    const Eigen::SparseMatrix<cplx> a = annihilator(*basis, j);
    ops.a.push_back({basis, Eigen::MatrixXcd(a)});
    ops.adag.push_back({basis, Eigen::MatrixXcd(a.adjoint())});
  }
  return ops;
}

FockOperator hamiltonian(const FockBasisPtr& basis, const Potential& pot, const PhysParams& params) {
  const Grid& g = pot.grid;
  require(g.size() == basis->sites(), ErrorCode::argument, "hamiltonian: lattice size differs from basis sites");
  const Eigen::MatrixXd D = laplacian_matrix(g);
  const Index n = basis->dimension();
  const int M = basis->sites();
  FockOperator H{basis, Eigen::MatrixXcd::Zero(n, n)};
  for (Index s = 0; s < n; ++s) {
    const auto& occ = basis->occupation(s);
    double diag = 0.0;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const double ni = occ[static_cast<std::size_t>(i)], nj = occ[static_cast<std::size_t>(j)];
        diag += pot.pair(i, j) * ni * (nj - (i == j ? 1.0 : 0.0));
      }
    H.matrix(s, s) += -diag / (2.0 * params.N);
    // sum_ij D_ij a_i^+ a_j
    for (int j = 0; j < M; ++j) {
      const Index mid = basis->lowered(s, j);
      if (mid < 0) continue;
      const double aj = std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(j)]));
      for (int i = 0; i < M; ++i) {
        const Index to = basis->raised(mid, i);
        if (to < 0) continue;
        const double ai = std::sqrt(static_cast<double>(basis->occupation(mid)[static_cast<std::size_t>(i)] + 1));
        H.matrix(to, s) += D(i, j) * ai * aj;
      }
    }
  }
  return H;
}

Eigen::VectorXcd expm_action(const Eigen::SparseMatrix<cplx>& G, const Eigen::VectorXcd& v) {
  double norm1 = 0.0;
  for (Index c = 0; c < G.outerSize(); ++c) {
    double col = 0.0;
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(G, c); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(norm1)));
  Eigen::VectorXcd out = v;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXcd term = out;
    Eigen::VectorXcd sum = out;
    for (int k = 1; k < 200; ++k) {
      term = (G * term) / (static_cast<double>(steps) * k);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    out = sum;
  }
  return out;
}

FockVector prepare(const FockBasisPtr& basis, const Field& phi, const Kernel& k, double N) {
  const Grid& g = phi.grid;
  require(g.size() == basis->sites(), ErrorCode::argument, "prepare: lattice size differs from basis sites");
  require_same_grid(g, k.grid, "prepare");
  require(N > 0.0, ErrorCode::argument, "prepare: N must be positive");
  const int M = basis->sites();
  const Index n = basis->dimension();
  const double h = g.cell_volume();

  std::vector<Eigen::SparseMatrix<cplx>> a, ad;
  for (int j = 0; j < M; ++j) {
    a.push_back(annihilator(*basis, j));
    ad.push_back(a.back().adjoint());
  }
  Eigen::SparseMatrix<cplx> pair(n, n);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (k.values(i, j) != cplx{}) pair += (0.5 * h * k.values(i, j)) * Eigen::SparseMatrix<cplx>(ad[i] * ad[j]);
  const Eigen::SparseMatrix<cplx> gb = pair - Eigen::SparseMatrix<cplx>(pair.adjoint());

  Eigen::SparseMatrix<cplx> gw(n, n);
  const double c = std::sqrt(N * h);
  for (int j = 0; j < M; ++j) gw += (c * phi.values[j]) * ad[j] - (c * std::conj(phi.values[j])) * a[j];

  Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(n);
  vac[0] = 1.0;
  FockVector psi{basis, expm_action(gw, expm_action(gb, vac))};
  const double tail = psi.truncation_tail();
  if (!(tail < kTailLimit))
    fail(ErrorCode::truncation_insufficient,
         "Fock cutoff n_max = " + std::to_string(basis->n_max()) + " leaves truncation tail " + std::to_string(tail));
  return psi;
}

ExactPropagator::ExactPropagator(const FockOperator& H) : basis_(H.basis) {
  for (int s = 0; s <= basis_->n_max(); ++s) {
    const Index b = basis_->sector_begin(s), m = basis_->sector_size(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.matrix.block(b, b, m, m));
    if (es.info() != Eigen::Success) fail(ErrorCode::numeric_domain, "sector eigensolver failed");
    vectors_.push_back(es.eigenvectors());
    values_.push_back(es.eigenvalues());
  }
}

FockVector ExactPropagator::evolve(const FockVector& psi, double t) const {
  FockVector out = psi;
  for (int s = 0; s <= basis_->n_max(); ++s) {
    const Index b = basis_->sector_begin(s), m = basis_->sector_size(s);
    const auto& V = vectors_[static_cast<std::size_t>(s)];
    const auto& E = values_[static_cast<std::size_t>(s)];
    Eigen::VectorXcd c = V.adjoint() * psi.amplitudes.segment(b, m);
    for (Index q = 0; q < m; ++q) c[q] *= std::polar(1.0, t * E[q]);
    out.amplitudes.segment(b, m) = V * c;
  }
  return out;
}

Marginals marginals(const FockVector& psi, const Grid& lattice, double N) {
  const int M = psi.basis->sites();
  require(lattice.size() == M, ErrorCode::argument, "marginals: lattice size differs from basis sites");
  const double h = lattice.cell_volume();
  std::vector<Eigen::VectorXcd> av, adv;
  for (int j = 0; j < M; ++j) {
    const Eigen::SparseMatrix<cplx> a = annihilator(*psi.basis, j);
    av.push_back(a * psi.amplitudes);
    adv.push_back(a.adjoint() * psi.amplitudes);
  }
  Marginals out{Field::zeros(lattice), Kernel::zeros(lattice, Symmetry::hermitian),
                Kernel::zeros(lattice, Symmetry::symmetric)};
  for (int i = 0; i < M; ++i) {
    out.l01.values[i] = psi.amplitudes.dot(av[static_cast<std::size_t>(i)]) / std::sqrt(N * h);
    for (int j = 0; j < M; ++j) {
      out.l11.values(i, j) = av[static_cast<std::size_t>(i)].dot(av[static_cast<std::size_t>(j)]) / (N * h);
      out.l02.values(i, j) = adv[static_cast<std::size_t>(i)].dot(av[static_cast<std::size_t>(j)]) / (N * h);
    }
  }
  return out;
}

double phase_opt_distance(const FockVector& a, const FockVector& b) {
  require(a.basis->dimension() == b.basis->dimension(), ErrorCode::argument, "phase_opt_distance: bases differ");
  const double d2 = a.amplitudes.squaredNorm() + b.amplitudes.squaredNorm() - 2.0 * std::abs(a.amplitudes.dot(b.amplitudes));
  return std::sqrt(std::max(0.0, d2));
}

double expectation(const FockOperator& op, const FockVector& psi) {
  return psi.amplitudes.dot(op.matrix * psi.amplitudes).real();
}

}  // namespace tdhfb
