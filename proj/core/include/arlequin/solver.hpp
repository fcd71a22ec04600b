#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "arlequin/coefficients.hpp"
#include "arlequin/enrichment.hpp"
#include "arlequin/fem.hpp"
#include "arlequin/linear_solver.hpp"

namespace arlequin {

enum class KktStrategy {
  Full,      // one sparse LU of the whole saddle-point matrix per kbar
  Condensed  // fine operator factored once, small dense system per kbar
};

const char* to_string(KktStrategy s);
KktStrategy kkt_strategy_from_string(const std::string& s);

struct SolverOptions {
  KktStrategy strategy = KktStrategy::Condensed;
  double pivot_threshold = 1e-10;
  double residual_tol = 1e-9;
};

// Everything that depends only on geometry and mesh sizes.
class Discretization {
 public:
  static std::shared_ptr<const Discretization> create(const DomainSpec& spec, double H, int refine_ratio);

  const DomainMeshes& meshes() const { return *meshes_; }
  const FeSpace& coarse() const { return coarse_; }
  const FeSpace& fine() const { return fine_; }
  const AbarComponents& abar() const { return abar_; }
  const SparseMatrix& abar_unit() const { return abar_unit_; }
  // unit Laplacian over D u D_c: J = d^T laplace d
  const SparseMatrix& laplace() const { return laplace_; }
  const EnrichmentBasis& enrichment() const { return *enrichment_; }
  const SparseMatrix& c_coarse() const { return c_coarse_; }
  const SparseMatrix& c_fine() const { return c_fine_; }
  const SparseMatrix& prolong() const { return prolong_; }  // fine x coarse

 private:
  Discretization(std::shared_ptr<const DomainMeshes> meshes);

  std::shared_ptr<const DomainMeshes> meshes_;
  FeSpace coarse_;
  FeSpace fine_;
  AbarComponents abar_;
  SparseMatrix abar_unit_;
  SparseMatrix laplace_;
  SparseMatrix c_coarse_, c_fine_, prolong_;
  std::shared_ptr<const EnrichmentBasis> enrichment_;
};

struct CoupledSolution {
  Matrix2 kbar = Matrix2::Zero();
  int bc_direction = 1;
  Eigen::VectorXd u_bar;    // coarse nodal values, Dirichlet trace included
  Eigen::VectorXd u_check;  // fine nodal values
  Eigen::VectorXd psi;      // multiplier coefficients: W_H dofs then enrichment
  Eigen::VectorXd psi_field;  // multiplier evaluated at fine nodes
  double residual = 0.0;             // relative block residual of the saddle-point system
  double constraint_residual = 0.0;  // max |C(u_bar - u_check, phi_k)|
};

struct DerivativeSolution {
  int order = 1;
  Eigen::VectorXd u_bar;  // vanishes on Gamma
  Eigen::VectorXd u_check;
  Eigen::VectorXd psi;
  double residual = 0.0;
};

struct DegenerateFamily {
  double lambda_opt = 0.0;       // J-minimising member
  Eigen::VectorXd u_bar;         // coarse nodal values of that member
  Eigen::VectorXd u_check;       // constant lambda_opt
  Eigen::VectorXd psi;           // zero
  Eigen::VectorXd u_a, u_b;      // member(lambda) = u_a + lambda u_b
  double J_min = 0.0;

  Eigen::VectorXd member(double lambda) const { return u_a + lambda * u_b; }
};

// Coupled problem for fixed (k_eps, eps, multiplier space); solves for many kbar.
class CoupledProblem {
 public:
  // enrichment_directions: {} plain W_H, {j} scalar case, {1, 2} matrix case
  CoupledProblem(std::shared_ptr<const Discretization> disc, const CoefficientField& field, double eps,
                 std::vector<int> enrichment_directions, SolverOptions options = {});

  const Discretization& discretization() const { return *disc_; }
  const MultiplierBasis& multipliers() const { return multipliers_; }
  const SparseMatrix& acheck() const { return acheck_; }
  double eps() const { return eps_; }
  const SolverOptions& options() const { return options_; }

  CoupledSolution solve(const Matrix2& kbar, int bc_direction) const;

  // order 1: rhs -Abar_1(u_bar, .); order 2: rhs -2 Abar_1(u_bar', .). kbar must be scalar.
  DerivativeSolution derivative(int order, const CoupledSolution& base, const DerivativeSolution* first = nullptr) const;

  DegenerateFamily degenerate_kbar0(int bc_direction) const;

  // dofs ordered: coarse interior, fine, multipliers
  SparseMatrix kkt_matrix(const Matrix2& kbar) const;

  double energy(const CoupledSolution& s) const;

 private:
  struct Block {
    Eigen::VectorXd u_free, u_fine, lambda;
    double residual;
  };
  Block solve_block(const Matrix2& kbar, const Eigen::VectorXd& f_u, const Eigen::VectorXd& f_fine,
                    const Eigen::VectorXd& f_lambda) const;
  Block solve_full(const Matrix2& kbar, const Eigen::VectorXd& rhs) const;
  Block solve_condensed(const Matrix2& kbar, const Eigen::VectorXd& f_u, const Eigen::VectorXd& f_fine,
                        const Eigen::VectorXd& f_lambda) const;
  double block_residual(const SparseMatrix& k_ii, const Block& b, const Eigen::VectorXd& f_u,
                        const Eigen::VectorXd& f_fine, const Eigen::VectorXd& f_lambda) const;
  void prepare_condensed();
  Eigen::VectorXd pinned_solve(Eigen::VectorXd rhs) const;

  std::shared_ptr<const Discretization> disc_;
  double eps_;
  SolverOptions options_;
  MultiplierBasis multipliers_;
  SparseMatrix acheck_;
  SparseMatrix g_free_;      // multiplier rows against interior coarse dofs
  SparseMatrix g_boundary_;  // multiplier rows against Dirichlet coarse dofs
  SparseMatrix g_fine_;

  // condensed strategy: Acheck is SPD once one node is pinned, the constant mode is
  // carried by an extra scalar unknown
  SparseCholesky fine_llt_;
  int pin_ = 0;
  Eigen::MatrixXd g_free_dense_;
  Eigen::MatrixXd t_;  // G_f Acheck_p^{-1} G_f^T
  Eigen::VectorXd g_one_;  // G_f 1

  // full strategy: the last factorization is reused for derivative systems
  mutable std::mutex full_mutex_;
  mutable std::optional<Matrix2> full_kbar_;
  mutable std::shared_ptr<SparseLu> full_lu_;
};

SparseMatrix restrict_free(const SparseMatrix& coarse_matrix, const FeSpace& coarse);

void write_solution_csv(std::ostream& os, const CoupledProblem& problem, const CoupledSolution& s);

}  // namespace arlequin
