#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "arlequin/coefficients.hpp"
#include "arlequin/linear_solver.hpp"

namespace arlequin {

// P1 on an n x n periodic grid of the unit cell; node (i, j) has index j*n + i.
struct CellProblem {
  int n = 0;
  std::vector<Matrix2> samples;  // per triangle, two per cell
  SparseMatrix stiffness;        // periodic, n^2 x n^2

  static CellProblem build(const CoefficientField& field, int n);
  // -\int k e_i . grad phi_v
  Eigen::VectorXd load(int direction) const;
};

struct CorrectorSolution {
  Eigen::VectorXd w;  // nodal values, zero mean
  double residual = 0.0;
};

CorrectorSolution solve_corrector(const CellProblem& cell, int direction);
CorrectorSolution solve_corrector(const CoefficientField& field, int n, int direction);

struct HomogenizedTensor {
  Matrix2 kstar = Matrix2::Zero();
  int n = 0;                    // finest resolution used
  double error_estimate = 0.0;  // |k*(n) - k*(n/2)| (max entry); 0 for a single level
  double asymmetry = 0.0;       // |k*_12 - k*_21| before symmetrisation
  std::vector<int> resolutions;
  std::vector<Matrix2> levels;  // raw k* per resolution
};

HomogenizedTensor homogenized_tensor(const CoefficientField& field, int n);
// Richardson extrapolation over successive doublings, e.g. {64, 128, 256}
HomogenizedTensor homogenized_tensor(const CoefficientField& field, const std::vector<int>& resolutions);

double richardson(double coarse, double mid, double fine);

void write_oracle_csv(std::ostream& os, const HomogenizedTensor& t, bool header = true);

}  // namespace arlequin
