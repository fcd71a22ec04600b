#include "arlequin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "arlequin/errors.hpp"

namespace arlequin {

const char* to_string(KktStrategy s) { return s == KktStrategy::Full ? "full" : "condensed"; }

KktStrategy kkt_strategy_from_string(const std::string& s) {
  if (s == "full") return KktStrategy::Full;
  if (s == "condensed") return KktStrategy::Condensed;
  throw InvalidParameter("unknown KKT strategy '" + s + "'");
}

std::shared_ptr<const Discretization> Discretization::create(const DomainSpec& spec, double H, int refine_ratio) {
  return std::shared_ptr<const Discretization>(new Discretization(build_domain(spec, H, refine_ratio)));
}

Discretization::Discretization(std::shared_ptr<const DomainMeshes> meshes)
    : meshes_(meshes), coarse_(FeSpace::coarse(meshes)), fine_(FeSpace::fine(meshes)) {
  abar_ = abar_components(coarse_);
  abar_unit_ = abar_.combine(Matrix2::Identity());
  laplace_ = assemble_stiffness(coarse_.mesh(), {1.0, 1.0, 0.0});
  c_coarse_ = assemble_C(coarse_, coarse_).matrix;
  c_fine_ = assemble_C(fine_, fine_).matrix;
  prolong_ = prolongation(coarse_, fine_);
  enrichment_ = cached_enrichment(coarse_, fine_, c_fine_, prolong_);
}

SparseMatrix restrict_free(const SparseMatrix& coarse_matrix, const FeSpace& coarse) {
  return select_cols(select_rows(coarse_matrix, coarse.free_dofs()), coarse.free_dofs());
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void append(Triplets& t, const SparseMatrix& m, int row0, int col0, double scale, bool transpose) {
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (transpose)
        t.emplace_back(row0 + c, col0 + r, scale * it.value());
      else
        t.emplace_back(row0 + r, col0 + c, scale * it.value());
    }
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

bool is_scalar(const Matrix2& k) { return k(0, 1) == 0.0 && k(1, 0) == 0.0 && k(0, 0) == k(1, 1); }

}  // namespace

CoupledProblem::CoupledProblem(std::shared_ptr<const Discretization> disc, const CoefficientField& field, double eps,
                               std::vector<int> enrichment_directions, SolverOptions options)
    : disc_(std::move(disc)), eps_(eps), options_(options) {
  const auto& d = *disc_;
  multipliers_ = enriched_multiplier_basis(d.coarse(), d.fine(), d.enrichment(), enrichment_directions, d.c_coarse(),
                                           d.c_fine(), d.prolong());
  acheck_ = assemble_Acheck(d.fine(), field, eps).matrix;
  g_free_ = select_cols(multipliers_.g_coarse(), d.coarse().free_dofs());
  g_boundary_ = select_cols(multipliers_.g_coarse(), d.coarse().dirichlet_dofs());
  g_fine_ = multipliers_.g_fine();
  if (options_.strategy == KktStrategy::Condensed) prepare_condensed();
}

void CoupledProblem::prepare_condensed() {
  const int nf = static_cast<int>(acheck_.rows());
  const int nm = multipliers_.size();
  SparseMatrix ap = acheck_;
  for (int c = 0; c < ap.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(ap, c); it; ++it)
      if (it.row() == pin_ || c == pin_) it.valueRef() = (it.row() == c) ? 1.0 : 0.0;
  ap.prune(0.0);
  if (!fine_llt_.factor(ap)) throw SingularKkt("pinned fine operator is not positive definite");

  const SparseMatrix gft = g_fine_.transpose();
  t_.resize(nm, nm);
  constexpr int block = 16;
  for (int j0 = 0; j0 < nm; j0 += block) {
    const int nb = std::min(block, nm - j0);
    Eigen::MatrixXd rhs = Eigen::MatrixXd(gft.middleCols(j0, nb));
    rhs.row(pin_).setZero();
    const Eigen::MatrixXd y = fine_llt_.solve(rhs);
    t_.middleCols(j0, nb) = g_fine_ * y;
  }
  t_ = 0.5 * (t_ + t_.transpose()).eval();
  g_one_ = g_fine_ * Eigen::VectorXd::Ones(nf);
  g_free_dense_ = Eigen::MatrixXd(g_free_);
}

Eigen::VectorXd CoupledProblem::pinned_solve(Eigen::VectorXd rhs) const {
  rhs[pin_] = 0.0;
  Eigen::VectorXd x = fine_llt_.solve(rhs);
  x[pin_] = 0.0;
  return x;
}

SparseMatrix CoupledProblem::kkt_matrix(const Matrix2& kbar) const {
  const auto& d = *disc_;
  const SparseMatrix kii = restrict_free(d.abar().combine(kbar), d.coarse());
  const int ni = static_cast<int>(kii.rows());
  const int nf = static_cast<int>(acheck_.rows());
  const int nm = multipliers_.size();
  Triplets t;
  t.reserve(kii.nonZeros() + acheck_.nonZeros() + 2 * (g_free_.nonZeros() + g_fine_.nonZeros()));
  append(t, kii, 0, 0, 1.0, false);
  append(t, acheck_, ni, ni, 1.0, false);
  append(t, g_free_, 0, ni + nf, 1.0, true);
  append(t, g_fine_, ni, ni + nf, -1.0, true);
  append(t, g_free_, ni + nf, 0, 1.0, false);
  append(t, g_fine_, ni + nf, ni, -1.0, false);
  SparseMatrix m(ni + nf + nm, ni + nf + nm);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

CoupledProblem::Block CoupledProblem::solve_full(const Matrix2& kbar, const Eigen::VectorXd& rhs) const {
  std::shared_ptr<SparseLu> lu;
  {
    std::lock_guard<std::mutex> lock(full_mutex_);
    if (full_kbar_ && *full_kbar_ == kbar) lu = full_lu_;
  }
  if (!lu) {
    lu = std::make_shared<SparseLu>();
    if (!lu->factor(kkt_matrix(kbar), options_.pivot_threshold)) throw SingularKkt("saddle-point matrix is singular");
    std::lock_guard<std::mutex> lock(full_mutex_);
    full_kbar_ = kbar;
    full_lu_ = lu;
  }
  const Eigen::VectorXd x = lu->solve(rhs);
  const int ni = static_cast<int>(disc_->coarse().free_dofs().size());
  const int nf = static_cast<int>(acheck_.rows());
  return {x.head(ni), x.segment(ni, nf), x.tail(multipliers_.size()), 0.0};
}

CoupledProblem::Block CoupledProblem::solve_condensed(const Matrix2& kbar, const Eigen::VectorXd& f_u,
                                                      const Eigen::VectorXd& f_fine,
                                                      const Eigen::VectorXd& f_lambda) const {
  const int ni = static_cast<int>(f_u.size());
  const int nm = multipliers_.size();
  const int n = ni + nm + 1;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  s.topLeftCorner(ni, ni) = Eigen::MatrixXd(restrict_free(disc_->abar().combine(kbar), disc_->coarse()));
  s.block(0, ni, ni, nm) = g_free_dense_.transpose();
  s.block(ni, 0, nm, ni) = g_free_dense_;
  s.block(ni, ni, nm, nm) = -t_;
  s.block(ni, ni + nm, nm, 1) = -g_one_;
  s.block(ni + nm, ni, 1, nm) = -g_one_.transpose();

  const bool has_ff = f_fine.squaredNorm() > 0.0;
  const Eigen::VectorXd w = has_ff ? pinned_solve(f_fine) : Eigen::VectorXd::Zero(f_fine.size());
  Eigen::VectorXd rhs(n);
  rhs << f_u, f_lambda + g_fine_ * w, f_fine.sum();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(s);
  if (!(lu.rcond() > options_.pivot_threshold)) throw SingularKkt("condensed saddle-point system is singular");
  const Eigen::VectorXd x = lu.solve(rhs);
  const Eigen::VectorXd lambda = x.segment(ni, nm);
  Eigen::VectorXd y = pinned_solve(f_fine + SparseMatrix(g_fine_.transpose()) * lambda);
  y.array() += x[ni + nm];
  return {x.head(ni), y, lambda, 0.0};
}

double CoupledProblem::block_residual(const SparseMatrix& k_ii, const Block& b, const Eigen::VectorXd& f_u,
                                      const Eigen::VectorXd& f_fine, const Eigen::VectorXd& f_lambda) const {
  const Eigen::VectorXd r1 = k_ii * b.u_free + SparseMatrix(g_free_.transpose()) * b.lambda - f_u;
  const Eigen::VectorXd r2 = acheck_ * b.u_fine - SparseMatrix(g_fine_.transpose()) * b.lambda - f_fine;
  const Eigen::VectorXd r3 = g_free_ * b.u_free - g_fine_ * b.u_fine - f_lambda;
  const double r = std::sqrt(r1.squaredNorm() + r2.squaredNorm() + r3.squaredNorm());
  const double f = std::sqrt(f_u.squaredNorm() + f_fine.squaredNorm() + f_lambda.squaredNorm());
  return f > 0.0 ? r / f : r;
}

CoupledProblem::Block CoupledProblem::solve_block(const Matrix2& kbar, const Eigen::VectorXd& f_u,
                                                  const Eigen::VectorXd& f_fine,
                                                  const Eigen::VectorXd& f_lambda) const {
  const SparseMatrix kii = restrict_free(disc_->abar().combine(kbar), disc_->coarse());
  auto run = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
    if (options_.strategy == KktStrategy::Full) {
      Eigen::VectorXd rhs(a.size() + b.size() + c.size());
      rhs << a, b, c;
      return solve_full(kbar, rhs);
    }
    return solve_condensed(kbar, a, b, c);
  };
  Block x = run(f_u, f_fine, f_lambda);
  x.residual = block_residual(kii, x, f_u, f_fine, f_lambda);
  if (!(x.residual <= options_.residual_tol)) {
    // one step of iterative refinement
    const Eigen::VectorXd r1 = f_u - kii * x.u_free - SparseMatrix(g_free_.transpose()) * x.lambda;
    const Eigen::VectorXd r2 = f_fine - acheck_ * x.u_fine + SparseMatrix(g_fine_.transpose()) * x.lambda;
    const Eigen::VectorXd r3 = f_lambda - g_free_ * x.u_free + g_fine_ * x.u_fine;
    const Block dx = run(r1, r2, r3);
    x.u_free += dx.u_free;
    x.u_fine += dx.u_fine;
    x.lambda += dx.lambda;
    x.residual = block_residual(kii, x, f_u, f_fine, f_lambda);
  }
  if (!std::isfinite(x.residual)) throw SingularKkt("non-finite solution");
  if (!(x.residual <= options_.residual_tol))
    throw SolverFailure("saddle-point residual " + std::to_string(x.residual) + " above tolerance");
  return x;
}

CoupledSolution CoupledProblem::solve(const Matrix2& kbar, int bc_direction) const {
  if (bc_direction != 1 && bc_direction != 2) throw InvalidParameter("bc_direction must be 1 or 2");
  if (!is_spd(kbar)) throw SingularKkt("kbar is not symmetric positive definite");
  const auto& coarse = disc_->coarse();
  const Eigen::VectorXd x = coarse.linear(bc_direction);
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(coarse.size());
  for (int v : coarse.dirichlet_dofs()) lift[v] = x[v];
  const SparseMatrix a = disc_->abar().combine(kbar);
  const Eigen::VectorXd f_u = -gather(a * lift, coarse.free_dofs());
  const Eigen::VectorXd f_fine = Eigen::VectorXd::Zero(acheck_.rows());
  const Eigen::VectorXd f_lambda = -(g_boundary_ * gather(lift, coarse.dirichlet_dofs()));

  const Block b = solve_block(kbar, f_u, f_fine, f_lambda);
  CoupledSolution s;
  s.kbar = kbar;
  s.bc_direction = bc_direction;
  s.u_bar = lift;
  for (size_t i = 0; i < coarse.free_dofs().size(); ++i) s.u_bar[coarse.free_dofs()[i]] = b.u_free[i];
  s.u_check = b.u_fine;
  s.psi = b.lambda;
  s.psi_field = multipliers_.evaluate(b.lambda);
  s.residual = b.residual;
  s.constraint_residual = (multipliers_.g_coarse() * s.u_bar - g_fine_ * s.u_check).cwiseAbs().maxCoeff();
  return s;
}

DerivativeSolution CoupledProblem::derivative(int order, const CoupledSolution& base,
                                              const DerivativeSolution* first) const {
  if (!is_scalar(base.kbar)) throw InvalidParameter("derivative systems need a scalar kbar");
  const auto& coarse = disc_->coarse();
  Eigen::VectorXd f_u;
  if (order == 1) {
    f_u = -gather(disc_->abar_unit() * base.u_bar, coarse.free_dofs());
  } else if (order == 2) {
    if (!first || first->order != 1) throw InvalidParameter("second derivative needs the first derivative");
    f_u = -2.0 * gather(disc_->abar_unit() * first->u_bar, coarse.free_dofs());
  } else {
    throw InvalidParameter("derivative order must be 1 or 2");
  }
  const Block b = solve_block(base.kbar, f_u, Eigen::VectorXd::Zero(acheck_.rows()),
                              Eigen::VectorXd::Zero(multipliers_.size()));
  DerivativeSolution out;
  out.order = order;
  out.u_bar = Eigen::VectorXd::Zero(coarse.size());
  for (size_t i = 0; i < coarse.free_dofs().size(); ++i) out.u_bar[coarse.free_dofs()[i]] = b.u_free[i];
  out.u_check = b.u_fine;
  out.psi = b.lambda;
  out.residual = b.residual;
  return out;
}

DegenerateFamily CoupledProblem::degenerate_kbar0(int bc_direction) const {
  const auto& coarse = disc_->coarse();
  const Mesh& mesh = coarse.mesh();
  const SparseMatrix lap_d = assemble_stiffness(mesh, {1.0, 0.0, 0.0});
  const Eigen::VectorXd x = coarse.linear(bc_direction);

  std::vector<int> unknown;
  std::vector<int> pos(coarse.size(), -1);
  for (int v : coarse.free_dofs())
    if (coarse.coupling_index()[v] < 0) {
      pos[v] = static_cast<int>(unknown.size());
      unknown.push_back(v);
    }
  const SparseMatrix k = select_cols(select_rows(lap_d, unknown), unknown);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(k);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("harmonic extension in D failed");

  auto harmonic = [&](const Eigen::VectorXd& fixed) {
    const Eigen::VectorXd rhs = -gather(lap_d * fixed, unknown);
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    Eigen::VectorXd u = fixed;
    for (size_t i = 0; i < unknown.size(); ++i) u[unknown[i]] = sol[i];
    return u;
  };
  Eigen::VectorXd fa = Eigen::VectorXd::Zero(coarse.size());
  Eigen::VectorXd fb = Eigen::VectorXd::Zero(coarse.size());
  for (int v : coarse.dirichlet_dofs()) fa[v] = x[v];
  for (int v : coarse.coupling_dofs()) fb[v] = 1.0;

  DegenerateFamily fam;
  fam.u_a = harmonic(fa);
  fam.u_b = harmonic(fb);
  const double num = fam.u_b.dot(lap_d * (fam.u_a - x));
  const double den = fam.u_b.dot(lap_d * fam.u_b);
  fam.lambda_opt = -num / den;
  fam.u_bar = fam.member(fam.lambda_opt);
  fam.u_check = Eigen::VectorXd::Constant(acheck_.rows(), fam.lambda_opt);
  fam.psi = Eigen::VectorXd::Zero(multipliers_.size());
  const Eigen::VectorXd d = fam.u_bar - x;
  fam.J_min = d.dot(disc_->laplace() * d);
  return fam;
}

double CoupledProblem::energy(const CoupledSolution& s) const {
  const SparseMatrix a = disc_->abar().combine(s.kbar);
  return 0.5 * s.u_bar.dot(a * s.u_bar) + 0.5 * s.u_check.dot(acheck_ * s.u_check);
}

void write_solution_csv(std::ostream& os, const CoupledProblem& problem, const CoupledSolution& s) {
  const auto old_precision = os.precision(17);
  const auto& d = problem.discretization();
  os << "node,x,y,value,field\n";
  const Mesh& cm = d.coarse().mesh();
  for (int v = 0; v < cm.num_vertices(); ++v)
    os << v << ',' << cm.vertices[v].x() << ',' << cm.vertices[v].y() << ',' << s.u_bar[v] << ",u_bar\n";
  const Mesh& fm = d.fine().mesh();
  for (int v = 0; v < fm.num_vertices(); ++v)
    os << v << ',' << fm.vertices[v].x() << ',' << fm.vertices[v].y() << ',' << s.u_check[v] << ",u_check\n";
  for (int v : d.fine().coupling_dofs())
    os << v << ',' << fm.vertices[v].x() << ',' << fm.vertices[v].y() << ',' << s.psi_field[v] << ",psi\n";
  os.precision(old_precision);
}

}  // namespace arlequin
