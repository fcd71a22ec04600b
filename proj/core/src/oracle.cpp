#include "arlequin/oracle.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "arlequin/errors.hpp"

namespace arlequin {

namespace {

Eigen::Matrix<double, 2, 3> p1_grads(double h, bool lower) {
  // lower: (0,0),(h,0),(h,h); upper: (0,0),(h,h),(0,h)
  Eigen::Matrix<double, 2, 3> g;
  if (lower)
    g << -1, 1, 0, 0, -1, 1;
  else
    g << 0, 1, -1, -1, 0, 1;
  return g / h;
}

std::array<int, 3> cell_triangle(int n, int i, int j, bool lower) {
  auto id = [n](int a, int b) { return ((b + n) % n) * n + (a + n) % n; };
  if (lower) return {id(i, j), id(i + 1, j), id(i + 1, j + 1)};
  return {id(i, j), id(i + 1, j + 1), id(i, j + 1)};
}

}  // namespace

CellProblem CellProblem::build(const CoefficientField& field, int n) {
  if (n < 8 || n % 2 != 0) throw InvalidParameter("cell resolution must be even and >= 8");
  CellProblem c;
  c.n = n;
  const double h = 1.0 / n;
  const double area = 0.5 * h * h;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(18) * n * n);
  c.samples.reserve(static_cast<size_t>(2) * n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (bool lower : {true, false}) {
        const Point centroid = lower ? Point((i + 2.0 / 3.0) * h, (j + 1.0 / 3.0) * h)
                                     : Point((i + 1.0 / 3.0) * h, (j + 2.0 / 3.0) * h);
        const Matrix2 k = field(centroid);
        c.samples.push_back(k);
        const auto g = p1_grads(h, lower);
        const Eigen::Matrix3d local = area * g.transpose() * k * g;
        const auto tri = cell_triangle(n, i, j, lower);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) trip.emplace_back(tri[a], tri[b], local(a, b));
      }
  c.stiffness.resize(n * n, n * n);
  c.stiffness.setFromTriplets(trip.begin(), trip.end());
  return c;
}

Eigen::VectorXd CellProblem::load(int direction) const {
  const double h = 1.0 / n;
  const double area = 0.5 * h * h;
  const Eigen::Vector2d e = direction == 1 ? Eigen::Vector2d::UnitX() : Eigen::Vector2d::UnitY();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n * n);
  int t = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (bool lower : {true, false}) {
        const auto g = p1_grads(h, lower);
        const Eigen::Vector3d local = -area * g.transpose() * (samples[t++] * e);
        const auto tri = cell_triangle(n, i, j, lower);
        for (int a = 0; a < 3; ++a) f[tri[a]] += local[a];
      }
  return f;
}

CorrectorSolution solve_corrector(const CellProblem& cell, int direction) {
  if (direction != 1 && direction != 2) throw InvalidParameter("direction must be 1 or 2");
  const int nn = cell.n * cell.n;
  // pin node 0, then shift to zero mean
  const SparseMatrix k = cell.stiffness.bottomRightCorner(nn - 1, nn - 1);
  const Eigen::VectorXd f = cell.load(direction);
  const Eigen::VectorXd rhs = f.tail(nn - 1);
  CorrectorSolution out;
  out.w = Eigen::VectorXd::Zero(nn);
  const double fnorm = rhs.norm();
  if (fnorm == 0.0) return out;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(k);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("cell stiffness factorization failed");
  out.w.tail(nn - 1) = ldlt.solve(rhs);
  out.w.array() -= out.w.mean();
  out.residual = (cell.stiffness * out.w - f).norm() / fnorm;
  if (!(out.residual <= 1e-10)) throw SolverFailure("corrector residual " + std::to_string(out.residual));
  return out;
}

CorrectorSolution solve_corrector(const CoefficientField& field, int n, int direction) {
  return solve_corrector(CellProblem::build(field, n), direction);
}

HomogenizedTensor homogenized_tensor(const CoefficientField& field, int n) {
  const CellProblem cell = CellProblem::build(field, n);
  const double h = 1.0 / n;
  const double area = 0.5 * h * h;
  Matrix2 k = Matrix2::Zero();
  for (int dir = 1; dir <= 2; ++dir) {
    const Eigen::Vector2d e = dir == 1 ? Eigen::Vector2d::UnitX() : Eigen::Vector2d::UnitY();
    const Eigen::VectorXd w = field.is_constant() ? Eigen::VectorXd::Zero(n * n) : solve_corrector(cell, dir).w;
    Eigen::Vector2d col = Eigen::Vector2d::Zero();
    int t = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (bool lower : {true, false}) {
          const auto tri = cell_triangle(n, i, j, lower);
          const Eigen::Vector3d wl(w[tri[0]], w[tri[1]], w[tri[2]]);
          col += area * (cell.samples[t++] * (e + p1_grads(h, lower) * wl));
        }
    k.col(dir - 1) = col;
  }
  HomogenizedTensor out;
  out.asymmetry = std::abs(k(0, 1) - k(1, 0));
  out.kstar = 0.5 * (k + k.transpose());
  out.n = n;
  out.resolutions = {n};
  out.levels = {out.kstar};
  return out;
}

double richardson(double coarse, double mid, double fine) {
  const double d1 = mid - coarse;
  const double d2 = fine - mid;
  if (std::abs(d2) <= 1e-14 * std::max(1.0, std::abs(fine))) return fine;
  const double ratio = d1 / d2;
  if (!std::isfinite(ratio) || ratio <= 1.05) return fine;
  return fine + d2 / (ratio - 1.0);
}

HomogenizedTensor homogenized_tensor(const CoefficientField& field, const std::vector<int>& resolutions) {
  if (resolutions.empty()) throw InvalidParameter("no cell resolutions given");
  HomogenizedTensor out;
  double asym = 0.0;
  for (int n : resolutions) {
    const auto t = homogenized_tensor(field, n);
    out.levels.push_back(t.kstar);
    asym = std::max(asym, t.asymmetry);
  }
  out.resolutions = resolutions;
  out.n = resolutions.back();
  out.asymmetry = asym;
  const size_t m = out.levels.size();
  out.kstar = out.levels.back();
  if (m >= 2) out.error_estimate = (out.levels[m - 1] - out.levels[m - 2]).cwiseAbs().maxCoeff();
  if (m >= 3) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        out.kstar(a, b) = richardson(out.levels[m - 3](a, b), out.levels[m - 2](a, b), out.levels[m - 1](a, b));
    out.kstar(1, 0) = out.kstar(0, 1);
  }
  return out;
}

void write_oracle_csv(std::ostream& os, const HomogenizedTensor& t, bool header) {
  const auto old_precision = os.precision(17);
  if (header) os << "k11,k22,k12,resolutions,error_estimate,asymmetry\n";
  os << t.kstar(0, 0) << ',' << t.kstar(1, 1) << ',' << t.kstar(0, 1) << ',';
  for (size_t i = 0; i < t.resolutions.size(); ++i) os << (i ? ";" : "") << t.resolutions[i];
  os << ',' << t.error_estimate << ',' << t.asymmetry << '\n';
  os.precision(old_precision);
}

}  // namespace arlequin
