#include "arlequin/linear_solver.hpp"

#include <mutex>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#ifdef ARLEQUIN_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif
#ifdef ARLEQUIN_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "arlequin/errors.hpp"

namespace arlequin {

struct SparseLu::Impl {
  SparseMatrix matrix;
#ifdef ARLEQUIN_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMatrix> lu;
#else
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
  mutable std::mutex mutex;
  bool ok = false;
};

SparseLu::SparseLu() : impl_(std::make_unique<Impl>()) {}
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

const char* SparseLu::backend() {
#ifdef ARLEQUIN_HAVE_UMFPACK
  return "umfpack";
#else
  return "eigen-sparselu";
#endif
}

bool SparseLu::factor(const SparseMatrix& a, double pivot_threshold) {
  if (a.rows() != a.cols()) throw SolverFailure("LU needs a square matrix");
  impl_->matrix = a;
  impl_->matrix.makeCompressed();
#ifdef ARLEQUIN_HAVE_UMFPACK
  (void)pivot_threshold;
  impl_->lu.compute(impl_->matrix);
#else
  impl_->lu.setPivotThreshold(pivot_threshold);
  impl_->lu.compute(impl_->matrix);
#endif
  impl_->ok = impl_->lu.info() == Eigen::Success;
  return impl_->ok;
}

bool SparseLu::factored() const { return impl_->ok; }
int SparseLu::rows() const { return static_cast<int>(impl_->matrix.rows()); }

Eigen::VectorXd SparseLu::solve(const Eigen::VectorXd& b) const {
  if (!impl_->ok) throw SolverFailure("solve before successful factorization");
  std::lock_guard<std::mutex> lock(impl_->mutex);
  Eigen::VectorXd x = impl_->lu.solve(b);
  return x;
}

Eigen::MatrixXd SparseLu::solve(const Eigen::MatrixXd& b) const {
  if (!impl_->ok) throw SolverFailure("solve before successful factorization");
  std::lock_guard<std::mutex> lock(impl_->mutex);
  Eigen::MatrixXd x(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = impl_->lu.solve(b.col(j));
  return x;
}

struct SparseCholesky::Impl {
#ifdef ARLEQUIN_HAVE_CHOLMOD
  Eigen::CholmodDecomposition<SparseMatrix, Eigen::Lower> llt;
#else
  Eigen::SimplicialLDLT<SparseMatrix> llt;
#endif
  int n = 0;
  mutable std::mutex mutex;
  bool ok = false;
};

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

const char* SparseCholesky::backend() {
#ifdef ARLEQUIN_HAVE_CHOLMOD
  return "cholmod";
#else
  return "eigen-ldlt";
#endif
}

bool SparseCholesky::factor(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw SolverFailure("Cholesky needs a square matrix");
  impl_->n = static_cast<int>(a.rows());
#ifdef ARLEQUIN_HAVE_CHOLMOD
  // METIS is tried by default and costs more than it saves on these meshes
  impl_->llt.cholmod().nmethods = 1;
  impl_->llt.cholmod().method[0].ordering = CHOLMOD_AMD;
#endif
  impl_->llt.compute(a);
  impl_->ok = impl_->llt.info() == Eigen::Success;
#ifndef ARLEQUIN_HAVE_CHOLMOD
  if (impl_->ok) impl_->ok = (impl_->llt.vectorD().array() > 0.0).all();
#endif
  return impl_->ok;
}

bool SparseCholesky::factored() const { return impl_->ok; }
int SparseCholesky::rows() const { return impl_->n; }

Eigen::VectorXd SparseCholesky::solve(const Eigen::VectorXd& b) const {
  if (!impl_->ok) throw SolverFailure("solve before successful factorization");
  std::lock_guard<std::mutex> lock(impl_->mutex);
  Eigen::VectorXd x = impl_->llt.solve(b);
  return x;
}

Eigen::MatrixXd SparseCholesky::solve(const Eigen::MatrixXd& b) const {
  if (!impl_->ok) throw SolverFailure("solve before successful factorization");
  std::lock_guard<std::mutex> lock(impl_->mutex);
  Eigen::MatrixXd x = impl_->llt.solve(b);
  return x;
}

}  // namespace arlequin
