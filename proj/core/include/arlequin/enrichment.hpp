#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "arlequin/fem.hpp"

namespace arlequin {

struct EnrichmentBasis {
  // index j-1 holds direction j
  std::vector<Eigen::VectorXd> psi;   // fine nodal, zero away from the closure of D_c
  std::vector<Eigen::VectorXd> flux;  // right-hand side functional of the psi problem
  std::vector<double> distance_to_WH; // C-norm distance of psi from W_H
  std::vector<double> residual;       // relative residual of the psi solve
};

// weights b with b^T phi = 1/2 \int_{Gamma_c} (e_j.n) phi - 1/2 \int_{Gamma_f} (e_j.n) phi
Eigen::VectorXd psi0_rhs(const FeSpace& fine, int direction);
Eigen::VectorXd solve_psi0(const FeSpace& fine, int direction);

EnrichmentBasis compute_enrichment(const FeSpace& coarse, const FeSpace& fine);
EnrichmentBasis compute_enrichment(const FeSpace& coarse, const FeSpace& fine, const SparseMatrix& c_fine,
                                   const SparseMatrix& prolong);

// psi for both directions, computed once per (geometry, H, m)
std::shared_ptr<const EnrichmentBasis> cached_enrichment(const FeSpace& coarse, const FeSpace& fine);
std::shared_ptr<const EnrichmentBasis> cached_enrichment(const FeSpace& coarse, const FeSpace& fine,
                                                         const SparseMatrix& c_fine, const SparseMatrix& prolong);
void clear_enrichment_cache();
std::size_t enrichment_cache_size();

// W_H plus a selection of enrichment functions, together with the constraint rows
// C(phi_k, .) of every multiplier basis function against coarse and fine functions.
class MultiplierBasis {
 public:
  int num_coarse() const { return static_cast<int>(coarse_dofs_.size()); }
  int num_enrichment() const { return static_cast<int>(directions_.size()); }
  int size() const { return num_coarse() + num_enrichment(); }
  const std::vector<int>& coarse_dofs() const { return coarse_dofs_; }
  const std::vector<int>& directions() const { return directions_; }

  // fine nodal vector of sum_k coefs_k phi_k
  Eigen::VectorXd evaluate(const Eigen::VectorXd& coefs) const;

  const SparseMatrix& g_coarse() const { return g_coarse_; }  // size x n_coarse
  const SparseMatrix& g_fine() const { return g_fine_; }      // size x n_fine

 private:
  friend MultiplierBasis enriched_multiplier_basis(const FeSpace&, const FeSpace&, const EnrichmentBasis&,
                                                   const std::vector<int>&, const SparseMatrix&, const SparseMatrix&,
                                                   const SparseMatrix&);
  std::vector<int> coarse_dofs_;
  std::vector<int> directions_;
  SparseMatrix prolong_;  // fine x W_H
  std::vector<Eigen::VectorXd> psi_;
  SparseMatrix g_coarse_, g_fine_;
};

// directions: {} for plain W_H, {j} for the scalar case, {1, 2} for the matrix case
MultiplierBasis enriched_multiplier_basis(const FeSpace& coarse, const FeSpace& fine, const EnrichmentBasis& basis,
                                          const std::vector<int>& directions);
// same, with C on both spaces and the full prolongation already assembled
MultiplierBasis enriched_multiplier_basis(const FeSpace& coarse, const FeSpace& fine, const EnrichmentBasis& basis,
                                          const std::vector<int>& directions, const SparseMatrix& c_coarse,
                                          const SparseMatrix& c_fine, const SparseMatrix& prolong);

}  // namespace arlequin
