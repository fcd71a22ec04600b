#include "arlequin/enrichment.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "arlequin/errors.hpp"
#include "arlequin/linear_solver.hpp"

namespace arlequin {

Eigen::VectorXd psi0_rhs(const FeSpace& fine, int direction) {
  if (direction != 1 && direction != 2) throw InvalidParameter("direction must be 1 or 2");
  const Eigen::Vector2d e = direction == 1 ? Eigen::Vector2d::UnitX() : Eigen::Vector2d::UnitY();
  return 0.5 * boundary_integral_weights(fine.mesh(), EdgeTag::GammaC, e) -
         0.5 * boundary_integral_weights(fine.mesh(), EdgeTag::GammaF, e);
}

namespace {

struct PsiSolve {
  Eigen::VectorXd psi;
  double residual;
};

class PsiSolver {
 public:
  PsiSolver(const FeSpace& fine, const SparseMatrix& cf) : fine_(fine) {
    const auto& dofs = fine.coupling_dofs();
    c_ = select_cols(select_rows(cf, dofs), dofs);
    if (!llt_.factor(c_)) throw SolverFailure("factorization of C failed");
  }

  PsiSolve operator()(int direction) const {
    const auto& dofs = fine_.coupling_dofs();
    const Eigen::VectorXd b_full = psi0_rhs(fine_, direction);
    Eigen::VectorXd b(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i) b[i] = b_full[dofs[i]];
    const Eigen::VectorXd x = llt_.solve(b);
    const double res = (c_ * x - b).norm() / b.norm();
    if (!(res <= 1e-10)) throw SolverFailure("psi0 residual " + std::to_string(res));
    PsiSolve out{Eigen::VectorXd::Zero(fine_.size()), res};
    for (size_t i = 0; i < dofs.size(); ++i) out.psi[dofs[i]] = x[i];
    return out;
  }

 private:
  const FeSpace& fine_;
  SparseMatrix c_;
  SparseCholesky llt_;
};

}  // namespace

Eigen::VectorXd solve_psi0(const FeSpace& fine, int direction) {
  if (fine.kind() != SpaceKind::Fine) throw MismatchedRegion("psi0 lives on the fine space");
  if (direction != 1 && direction != 2) throw InvalidParameter("direction must be 1 or 2");
  return PsiSolver(fine, assemble_C(fine, fine).matrix)(direction).psi;
}

EnrichmentBasis compute_enrichment(const FeSpace& coarse, const FeSpace& fine) {
  return compute_enrichment(coarse, fine, assemble_C(fine, fine).matrix, prolongation(coarse, fine));
}

EnrichmentBasis compute_enrichment(const FeSpace& coarse, const FeSpace& fine, const SparseMatrix& cf,
                                   const SparseMatrix& prolong) {
  const PsiSolver solver(fine, cf);
  EnrichmentBasis out;
  for (int j = 1; j <= 2; ++j) {
    auto s = solver(j);
    const auto proj = project_WH(coarse, cf, prolong, s.psi);
    const Eigen::VectorXd r = s.psi - prolong * proj.coarse;
    out.distance_to_WH.push_back(std::sqrt(std::max(0.0, r.dot(cf * r))));
    out.flux.push_back(psi0_rhs(fine, j));
    out.psi.push_back(std::move(s.psi));
    out.residual.push_back(s.residual);
  }
  return out;
}

namespace {

using CacheKey = std::tuple<double, double, double, double, int>;

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<CacheKey, std::shared_ptr<const EnrichmentBasis>>& cache() {
  static std::map<CacheKey, std::shared_ptr<const EnrichmentBasis>> c;
  return c;
}

}  // namespace

std::shared_ptr<const EnrichmentBasis> cached_enrichment(const FeSpace& coarse, const FeSpace& fine) {
  return cached_enrichment(coarse, fine, assemble_C(fine, fine).matrix, prolongation(coarse, fine));
}

std::shared_ptr<const EnrichmentBasis> cached_enrichment(const FeSpace& coarse, const FeSpace& fine,
                                                         const SparseMatrix& cf, const SparseMatrix& prolong) {
  const DomainMeshes& d = fine.domain();
  const CacheKey key{d.spec.L, d.spec.L_c, d.spec.L_f, d.H, d.refine_ratio};
  {
    std::lock_guard<std::mutex> lock(cache_mutex());
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
  }
  auto basis = std::make_shared<const EnrichmentBasis>(compute_enrichment(coarse, fine, cf, prolong));
  std::lock_guard<std::mutex> lock(cache_mutex());
  return cache().emplace(key, basis).first->second;
}

void clear_enrichment_cache() {
  std::lock_guard<std::mutex> lock(cache_mutex());
  cache().clear();
}

std::size_t enrichment_cache_size() {
  std::lock_guard<std::mutex> lock(cache_mutex());
  return cache().size();
}

Eigen::VectorXd MultiplierBasis::evaluate(const Eigen::VectorXd& coefs) const {
  if (coefs.size() != size()) throw InvalidParameter("multiplier coefficient vector has the wrong size");
  Eigen::VectorXd v = prolong_ * coefs.head(num_coarse());
  for (int k = 0; k < num_enrichment(); ++k) v += coefs[num_coarse() + k] * psi_[k];
  return v;
}

MultiplierBasis enriched_multiplier_basis(const FeSpace& coarse, const FeSpace& fine, const EnrichmentBasis& basis,
                                          const std::vector<int>& directions) {
  return enriched_multiplier_basis(coarse, fine, basis, directions, assemble_C(coarse, coarse).matrix,
                                   assemble_C(fine, fine).matrix, prolongation(coarse, fine));
}

MultiplierBasis enriched_multiplier_basis(const FeSpace& coarse, const FeSpace& fine, const EnrichmentBasis& basis,
                                          const std::vector<int>& directions, const SparseMatrix& cc,
                                          const SparseMatrix& cf, const SparseMatrix& p) {
  MultiplierBasis mb;
  mb.coarse_dofs_ = coarse.coupling_dofs();
  mb.directions_ = directions;
  mb.prolong_ = select_cols(p, mb.coarse_dofs_);
  for (int j : directions) {
    if (j != 1 && j != 2) throw InvalidParameter("enrichment direction must be 1 or 2");
    if (!(basis.distance_to_WH[j - 1] >= 1e-12))
      throw CollinearEnrichment("psi0 direction " + std::to_string(j) + " lies in W_H");
    mb.psi_.push_back(basis.psi[j - 1]);
  }

  const int nw = mb.num_coarse();
  const int ne = mb.num_enrichment();

  // C(psi_j, v) equals flux_j^T v for every v in W_h, which keeps these rows sparse
  std::vector<Eigen::Triplet<double>> tc, tf;
  const SparseMatrix cc_rows = select_rows(cc, mb.coarse_dofs_);
  const SparseMatrix cf_rows = SparseMatrix(mb.prolong_.transpose()) * cf;
  for (int c = 0; c < cc_rows.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(cc_rows, c); it; ++it) tc.emplace_back(it.row(), c, it.value());
  for (int c = 0; c < cf_rows.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(cf_rows, c); it; ++it) tf.emplace_back(it.row(), c, it.value());
  for (int k = 0; k < ne; ++k) {
    const Eigen::VectorXd& b = basis.flux[directions[k] - 1];
    const Eigen::VectorXd bc = SparseMatrix(p.transpose()) * b;
    for (int v = 0; v < bc.size(); ++v)
      if (bc[v] != 0.0) tc.emplace_back(nw + k, v, bc[v]);
    for (int v = 0; v < b.size(); ++v)
      if (b[v] != 0.0) tf.emplace_back(nw + k, v, b[v]);
  }
  mb.g_coarse_.resize(nw + ne, coarse.size());
  mb.g_coarse_.setFromTriplets(tc.begin(), tc.end());
  mb.g_fine_.resize(nw + ne, fine.size());
  mb.g_fine_.setFromTriplets(tf.begin(), tf.end());
  return mb;
}

}  // namespace arlequin
