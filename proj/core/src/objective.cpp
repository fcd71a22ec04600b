#include "arlequin/objective.hpp"

#include <Eigen/SparseCholesky>

#include "arlequin/errors.hpp"

namespace arlequin {

double objective_value(const Discretization& disc, const Eigen::VectorXd& u_bar, int direction) {
  const Eigen::VectorXd d = u_bar - disc.coarse().linear(direction);
  return std::max(0.0, d.dot(disc.laplace() * d));
}

ObjectiveEval eval_J(const CoupledProblem& problem, const Matrix2& kbar, int bc_direction, bool derivatives) {
  const auto& disc = problem.discretization();
  const CoupledSolution s = problem.solve(kbar, bc_direction);
  ObjectiveEval e;
  e.kbar = kbar;
  e.residual = s.residual;
  e.constraint_residual = s.constraint_residual;
  const Eigen::VectorXd d = s.u_bar - disc.coarse().linear(bc_direction);
  const Eigen::VectorXd ld = disc.laplace() * d;
  e.J = std::max(0.0, d.dot(ld));
  if (derivatives) {
    const DerivativeSolution d1 = problem.derivative(1, s);
    const DerivativeSolution d2 = problem.derivative(2, s, &d1);
    e.dJ = 2.0 * d1.u_bar.dot(ld);
    e.d2J = 2.0 * d1.u_bar.dot(disc.laplace() * d1.u_bar) + 2.0 * d2.u_bar.dot(ld);
    e.residual = std::max({e.residual, d1.residual, d2.residual});
  }
  return e;
}

ObjectiveEval eval_J(const CoupledProblem& problem, double kbar, int bc_direction, bool derivatives) {
  if (!(kbar > 0.0)) throw NonPositiveIterate("scalar kbar must be positive");
  return eval_J(problem, kbar * Matrix2::Identity(), bc_direction, derivatives);
}

namespace {

// solves for the free coarse dofs with values `fixed` prescribed at the remaining nodes
Eigen::VectorXd constrained_solve(const SparseMatrix& a, const std::vector<int>& unknown, const Eigen::VectorXd& fixed) {
  std::vector<int> pos(fixed.size(), -1);
  for (size_t i = 0; i < unknown.size(); ++i) pos[unknown[i]] = static_cast<int>(i);
  const SparseMatrix k = select_cols(select_rows(a, unknown), unknown);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(k);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("auxiliary coarse problem is singular");
  const Eigen::VectorXd af = a * fixed;
  Eigen::VectorXd rhs(unknown.size());
  for (size_t i = 0; i < unknown.size(); ++i) rhs[i] = -af[unknown[i]];
  const Eigen::VectorXd x = ldlt.solve(rhs);
  Eigen::VectorXd u = fixed;
  for (size_t i = 0; i < unknown.size(); ++i) u[unknown[i]] = x[i];
  return u;
}

}  // namespace

ConditionReport check_conditions(const Discretization& disc, int direction, double best_J) {
  const auto& coarse = disc.coarse();
  const Eigen::VectorXd x = coarse.linear(direction);
  ConditionReport r;
  r.I_estimate = best_J;
  r.area_Dc = disc.meshes().spec.area_Dc();

  Eigen::VectorXd lift = Eigen::VectorXd::Zero(coarse.size());
  for (int v : coarse.dirichlet_dofs()) lift[v] = x[v];
  const Eigen::VectorXd u0 = constrained_solve(disc.abar_unit(), coarse.free_dofs(), lift);
  r.rhs1 = objective_value(disc, u0, direction);

  const SparseMatrix lap_d = assemble_stiffness(coarse.mesh(), {1.0, 0.0, 0.0});
  std::vector<int> unknown;
  for (int v : coarse.free_dofs())
    if (coarse.coupling_index()[v] < 0) unknown.push_back(v);
  Eigen::VectorXd fb = Eigen::VectorXd::Zero(coarse.size());
  for (int v : coarse.coupling_dofs()) fb[v] = 1.0;
  const Eigen::VectorXd ua = constrained_solve(lap_d, unknown, lift);
  const Eigen::VectorXd ub = constrained_solve(lap_d, unknown, fb);
  const Eigen::VectorXd da = ua - x;
  const double cross = ub.dot(lap_d * da);
  const double bb = ub.dot(lap_d * ub);
  r.rhs2 = r.area_Dc + da.dot(lap_d * da) - cross * cross / bb;

  const Eigen::VectorXd best = ua - (cross / bb) * ub;
  r.rhs2_family = objective_value(disc, best, direction);

  r.condition1 = best_J < r.rhs1;
  r.condition2 = best_J < r.rhs2;
  return r;
}

}  // namespace arlequin
