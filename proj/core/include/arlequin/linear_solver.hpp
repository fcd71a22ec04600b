#pragma once

#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace arlequin {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Sparse LU for square unsymmetric or indefinite systems. Thread-safe solves.
class SparseLu {
 public:
  SparseLu();
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  // false when the matrix is numerically singular
  bool factor(const SparseMatrix& a, double pivot_threshold = 1e-10);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  bool factored() const;
  int rows() const;

  static const char* backend();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Sparse Cholesky for symmetric positive definite systems. Thread-safe solves.
class SparseCholesky {
 public:
  SparseCholesky();
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  // false when the matrix is not numerically positive definite
  bool factor(const SparseMatrix& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  bool factored() const;
  int rows() const;

  static const char* backend();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace arlequin
