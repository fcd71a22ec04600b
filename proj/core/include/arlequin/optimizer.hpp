#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "arlequin/objective.hpp"

namespace arlequin {

enum class ScalarMethod { NewtonSafeguarded, Brent };
const char* to_string(ScalarMethod m);
ScalarMethod scalar_method_from_string(const std::string& s);

struct OptimizerSettings {
  double init = 1.0;
  ScalarMethod method = ScalarMethod::NewtonSafeguarded;
  double c_minus = 0.1;  // matrix case bounds
  double c_plus = 10.0;
  double grad_tol = 1e-8;
  double step_tol = 1e-8;
  int max_evals = 200;
  double fd_step = 1e-4;  // relative central-difference step (matrix case)
  double f_tol = 1e-10;   // matrix case: stop when an accepted step lowers J by less than f_tol * J
};

struct TraceEntry {
  Matrix2 kbar = Matrix2::Zero();
  double J = 0.0;
  double dJ = 0.0;   // NaN when not computed
  double d2J = 0.0;  // NaN when not computed
  bool accepted = false;
};

struct OptimizationTrace {
  std::vector<TraceEntry> iterates;
  std::string termination;
  Matrix2 kbar_opt = Matrix2::Zero();
  double J_opt = 0.0;
  int evaluations = 0;
  int iterations = 0;
  double wall_time = 0.0;
};

OptimizationTrace optimize_scalar(const CoupledProblem& problem, int bc_direction, const OptimizerSettings& settings);
OptimizationTrace optimize_matrix(const CoupledProblem& problem, int bc_direction, const OptimizerSettings& settings);

// eigenvalue clamp onto M(c_minus, c_plus)
Matrix2 project_onto_bounds(const Matrix2& k, double c_minus, double c_plus);

struct ConvexitySample {
  double kbar = 0.0;
  double J = 0.0;
  double dJ = 0.0;
  double d2J = 0.0;
  double dJ_fd = 0.0;
  double d2J_fd = 0.0;
};

struct ConvexityReport {
  std::vector<ConvexitySample> samples;
  bool dJ_changes_sign = false;
  double kbar_near_min = 0.0;  // sample with the smallest J
  double d2J_near_min = 0.0;
};

ConvexityReport convexity_probe(const CoupledProblem& problem, int bc_direction, const std::vector<double>& window,
                                double fd_step = 1e-4);

void write_trace_csv(std::ostream& os, const OptimizationTrace& trace);
void write_conditions_csv(std::ostream& os, const ConditionReport& report, bool header = true);
void write_convexity_csv(std::ostream& os, const ConvexityReport& report);

}  // namespace arlequin
