#pragma once

#include "tdhfb/model.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace tdhfb {

// Occupation-number basis of M_sites bosonic modes with total number <= n_max,
// ordered by sector (total number) and then lexicographically.
class FockBasis {
 public:
  static std::shared_ptr<const FockBasis> make(int sites, int n_max);

  int sites() const { return sites_; }
  int n_max() const { return n_max_; }
  Index dimension() const { return static_cast<Index>(states_.size()); }
  const std::vector<int>& occupation(Index i) const { return states_[static_cast<std::size_t>(i)]; }
  int sector(Index i) const { return sector_[static_cast<std::size_t>(i)]; }
  // First index and size of the sector with total number n.
  Index sector_begin(int n) const { return begin_[static_cast<std::size_t>(n)]; }
  Index sector_size(int n) const { return begin_[static_cast<std::size_t>(n) + 1] - begin_[static_cast<std::size_t>(n)]; }
  // Index of the state with n_site raised (lowered) by one; -1 if outside the basis.
  Index raised(Index i, int site) const { return up_[static_cast<std::size_t>(site)][static_cast<std::size_t>(i)]; }
  Index lowered(Index i, int site) const { return down_[static_cast<std::size_t>(site)][static_cast<std::size_t>(i)]; }
  Index index_of(const std::vector<int>& occupation) const;

 private:
  int sites_ = 0;
  int n_max_ = 0;
  std::vector<std::vector<int>> states_;
  std::vector<int> sector_;
  std::vector<Index> begin_;
  std::vector<std::vector<Index>> up_, down_;
};

using FockBasisPtr = std::shared_ptr<const FockBasis>;

struct FockOperator {
  FockBasisPtr basis;
  Eigen::MatrixXcd matrix;
};

struct FockVector {
  FockBasisPtr basis;
  Eigen::VectorXcd amplitudes;

  // Weight on sectors with total number >= n_max - 2.
  double truncation_tail() const;
  double norm() const { return amplitudes.norm(); }
};

struct LadderOps {
  std::vector<FockOperator> a;
  std::vector<FockOperator> adag;
};

LadderOps ladder_ops(const FockBasisPtr& basis);

// Sparse a_j and a_j^dagger.
Eigen::SparseMatrix<cplx> annihilator(const FockBasis& basis, int site);

// Matrix of the generator H_N = sum D_ij a_i^+ a_j - (1/2N) sum V_ij a_i^+ a_j^+ a_j a_i,
// D the lattice Laplacian and V_ij = v_N(x_i - x_j). States evolve as exp(i t H_N).
FockOperator hamiltonian(const FockBasisPtr& basis, const Potential& pot, const PhysParams& params);

// exp(-sqrt(N) A(phi)) exp(-B(k)) vacuum on the lattice of pot.grid:
//   -sqrt(N) A = sqrt(N h^d) sum (phi_j a_j^+ - conj(phi_j) a_j)
//   -B        = (1/2) sum (h^d k_ij a_i^+ a_j^+ - h.c.)
// Throws truncation_insufficient when the tail reaches 1e-8.
FockVector prepare(const FockBasisPtr& basis, const Field& phi, const Kernel& k, double N);

// Taylor-series action exp(G) v for a sparse anti-Hermitian G.
Eigen::VectorXcd expm_action(const Eigen::SparseMatrix<cplx>& G, const Eigen::VectorXcd& v);

// Exact evolution by eigendecomposition of each particle-number sector.
class ExactPropagator {
 public:
  explicit ExactPropagator(const FockOperator& H);
  FockVector evolve(const FockVector& psi, double t) const;

 private:
  FockBasisPtr basis_;
  std::vector<Eigen::MatrixXcd> vectors_;
  std::vector<Eigen::VectorXd> values_;
};

struct Marginals {
  Field l01;
  Kernel l11;
  Kernel l02;
};

Marginals marginals(const FockVector& psi, const Grid& lattice, double N);

double phase_opt_distance(const FockVector& a, const FockVector& b);

double expectation(const FockOperator& op, const FockVector& psi);

}  // namespace tdhfb
