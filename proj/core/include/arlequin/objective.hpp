#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arlequin/solver.hpp"

namespace arlequin {

struct ObjectiveEval {
  Matrix2 kbar = Matrix2::Zero();
  double J = 0.0;
  std::optional<double> dJ;
  std::optional<double> d2J;
  double residual = 0.0;
  double constraint_residual = 0.0;
};

// \int_{D u D_c} |grad u_bar - e_j|^2, exact for P1
double objective_value(const Discretization& disc, const Eigen::VectorXd& u_bar, int direction);

ObjectiveEval eval_J(const CoupledProblem& problem, const Matrix2& kbar, int bc_direction, bool derivatives = false);
ObjectiveEval eval_J(const CoupledProblem& problem, double kbar, int bc_direction, bool derivatives = false);

struct ConditionReport {
  double I_estimate = 0.0;  // best J found (empirical)
  double rhs1 = 0.0;
  double rhs2 = 0.0;
  double area_Dc = 0.0;
  bool condition1 = false;
  bool condition2 = false;
  double rhs2_family = 0.0;  // same quantity through the k=0 minimiser family
};

// rhs1 from the unit-weighted coarse problem; rhs2 from the two harmonic extensions in D
ConditionReport check_conditions(const Discretization& disc, int direction, double best_J);

}  // namespace arlequin
