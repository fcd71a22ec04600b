#include "arlequin/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Dense>

#include "arlequin/errors.hpp"

namespace arlequin {

using Triplets = std::vector<Eigen::Triplet<double>>;

FeSpace FeSpace::coarse(std::shared_ptr<const DomainMeshes> meshes) {
  return FeSpace(SpaceKind::Coarse, std::move(meshes));
}

FeSpace FeSpace::fine(std::shared_ptr<const DomainMeshes> meshes) {
  return FeSpace(SpaceKind::Fine, std::move(meshes));
}

const Mesh& FeSpace::mesh() const { return kind_ == SpaceKind::Coarse ? meshes_->coarse : meshes_->fine; }

FeSpace::FeSpace(SpaceKind kind, std::shared_ptr<const DomainMeshes> meshes)
    : kind_(kind), meshes_(std::move(meshes)) {
  const Mesh& m = mesh();
  const int n = m.num_vertices();
  std::vector<char> on_gamma(n, 0);
  for (const auto& e : m.tagged_edges)
    if (e.tag == EdgeTag::Gamma) on_gamma[e.v0] = on_gamma[e.v1] = 1;
  const auto in_dc = m.region_closure_mask(Region::Dc);
  free_index_.assign(n, -1);
  coupling_index_.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (on_gamma[v]) {
      dirichlet_.push_back(v);
    } else {
      free_index_[v] = static_cast<int>(free_.size());
      free_.push_back(v);
    }
    if (in_dc[v]) {
      coupling_index_[v] = static_cast<int>(coupling_.size());
      coupling_.push_back(v);
    }
  }
}

Eigen::VectorXd FeSpace::interpolate(const std::function<double(const Point&)>& f) const {
  const Mesh& m = mesh();
  Eigen::VectorXd v(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) v[i] = f(m.vertices[i]);
  return v;
}

Eigen::VectorXd FeSpace::linear(int direction) const {
  if (direction != 1 && direction != 2) throw InvalidParameter("direction must be 1 or 2");
  return interpolate([direction](const Point& p) { return p[direction - 1]; });
}

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Point& p0 = mesh.vertices[tri[0]];
  const Point& p1 = mesh.vertices[tri[1]];
  const Point& p2 = mesh.vertices[tri[2]];
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  ElementGeometry g;
  g.area = 0.5 * det;
  g.grads << p1.y() - p2.y(), p2.y() - p0.y(), p0.y() - p1.y(),
             p2.x() - p1.x(), p0.x() - p2.x(), p1.x() - p0.x();
  g.grads /= det;
  return g;
}

namespace {

SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double weight_of(const RegionWeights& w, Region r) { return w[static_cast<int>(r)]; }

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const RegionWeights& weights, const std::vector<Matrix2>* element_k) {
  if (element_k && static_cast<int>(element_k->size()) != mesh.num_triangles())
    throw InvalidParameter("one coefficient sample per triangle expected");
  Triplets trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double w = weight_of(weights, mesh.regions[t]);
    if (w == 0.0) continue;
    const auto g = element_geometry(mesh, t);
    Eigen::Matrix3d local;
    if (element_k)
      local = g.grads.transpose() * (*element_k)[t] * g.grads;
    else
      local = g.grads.transpose() * g.grads;
    local *= w * g.area;
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.emplace_back(tri[a], tri[b], local(a, b));
  }
  return from_triplets(mesh.num_vertices(), mesh.num_vertices(), trip);
}

SparseMatrix assemble_mass(const Mesh& mesh, const RegionWeights& weights) {
  Triplets trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double w = weight_of(weights, mesh.regions[t]);
    if (w == 0.0) continue;
    const double a = w * mesh.triangle_area(t) / 12.0;
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], i == j ? 2.0 * a : a);
  }
  return from_triplets(mesh.num_vertices(), mesh.num_vertices(), trip);
}

SparseMatrix AbarComponents::combine(const Matrix2& kbar) const {
  SparseMatrix m = kbar(0, 0) * a11 + kbar(1, 1) * a22 + (0.5 * (kbar(0, 1) + kbar(1, 0))) * a12;
  m.makeCompressed();
  return m;
}

AbarComponents abar_components(const FeSpace& coarse) {
  if (coarse.kind() != SpaceKind::Coarse) throw MismatchedRegion("Abar lives on the coarse space");
  const RegionWeights w{1.0, 0.5, 0.0};
  Matrix2 e11 = Matrix2::Zero(), e22 = Matrix2::Zero(), e12 = Matrix2::Zero();
  e11(0, 0) = 1.0;
  e22(1, 1) = 1.0;
  e12(0, 1) = e12(1, 0) = 1.0;
  const Mesh& m = coarse.mesh();
  AbarComponents c;
  for (auto [k, out] : {std::pair{&e11, &c.a11}, std::pair{&e22, &c.a22}, std::pair{&e12, &c.a12}}) {
    std::vector<Matrix2> ks(m.num_triangles(), *k);
    *out = assemble_stiffness(m, w, &ks);
  }
  return c;
}

AssembledForm assemble_Abar(const FeSpace& coarse, const Matrix2& kbar) {
  if (coarse.kind() != SpaceKind::Coarse) throw MismatchedRegion("Abar lives on the coarse space");
  if (!is_spd(kbar)) throw NonSpdCoefficient("kbar must be symmetric positive definite");
  const std::vector<Matrix2> ks(coarse.mesh().num_triangles(), kbar);
  return {assemble_stiffness(coarse.mesh(), {1.0, 0.5, 0.0}, &ks), SpaceKind::Coarse, SpaceKind::Coarse};
}

AssembledForm assemble_Acheck(const FeSpace& fine, const CoefficientField& field, double eps) {
  if (fine.kind() != SpaceKind::Fine) throw MismatchedRegion("Acheck lives on the fine space");
  if (!(eps > 0.0)) throw InvalidParameter("eps must be positive");
  const Mesh& m = fine.mesh();
  std::vector<Point> mids(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) mids[t] = m.centroid(t);
  const auto ks = sample_k_eps(field, eps, mids);
  return {assemble_stiffness(m, {0.0, 0.5, 1.0}, &ks), SpaceKind::Fine, SpaceKind::Fine};
}

SparseMatrix prolongation(const FeSpace& coarse, const FeSpace& fine) {
  if (coarse.kind() != SpaceKind::Coarse || fine.kind() != SpaceKind::Fine ||
      coarse.domain_ptr() != fine.domain_ptr())
    throw MismatchedRegion("prolongation needs a coarse and a fine space on the same meshes");
  const DomainMeshes& d = coarse.domain();
  const Mesh& cm = d.coarse;
  const Mesh& fm = d.fine;
  std::vector<int> host(fm.num_vertices(), -1);
  for (int t = 0; t < fm.num_triangles(); ++t) {
    const int parent = d.map.parent[t];
    if (parent < 0) continue;
    for (int v : fm.triangles[t])
      if (host[v] < 0) host[v] = parent;
  }
  Triplets trip;
  for (int v = 0; v < fm.num_vertices(); ++v) {
    const int parent = host[v];
    if (parent < 0) continue;
    const auto g = element_geometry(cm, parent);
    const auto& tri = cm.triangles[parent];
    const Point rel = fm.vertices[v] - cm.vertices[tri[0]];
    const double l1 = g.grads.col(1).dot(rel);
    const double l2 = g.grads.col(2).dot(rel);
    const double lam[3] = {1.0 - l1 - l2, l1, l2};
    for (int k = 0; k < 3; ++k) {
      double w = lam[k];
      if (std::abs(w) < 1e-13) continue;
      if (std::abs(w - 1.0) < 1e-13) w = 1.0;
      trip.emplace_back(v, tri[k], w);
    }
  }
  return from_triplets(fm.num_vertices(), cm.num_vertices(), trip);
}

AssembledForm assemble_C(const FeSpace& rows, const FeSpace& cols) {
  if (rows.domain_ptr() != cols.domain_ptr()) throw MismatchedRegion("C between spaces on different meshes");
  const RegionWeights w{0.0, 1.0, 0.0};
  auto same = [&w](const FeSpace& s) {
    SparseMatrix m = assemble_stiffness(s.mesh(), w) + assemble_mass(s.mesh(), w);
    m.makeCompressed();
    return m;
  };
  if (rows.kind() == cols.kind()) return {same(rows), rows.kind(), cols.kind()};
  const FeSpace& coarse = rows.kind() == SpaceKind::Coarse ? rows : cols;
  const FeSpace& fine = rows.kind() == SpaceKind::Fine ? rows : cols;
  const SparseMatrix p = prolongation(coarse, fine);
  const SparseMatrix cf = same(fine);
  SparseMatrix m;
  if (rows.kind() == SpaceKind::Coarse)
    m = SparseMatrix(p.transpose()) * cf;
  else
    m = cf * p;
  m.makeCompressed();
  return {m, rows.kind(), cols.kind()};
}

SparseMatrix select_rows(const SparseMatrix& m, const std::vector<int>& rows) {
  Triplets trip;
  std::vector<int> pos(m.rows(), -1);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) pos[rows[i]] = i;
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it)
      if (pos[it.row()] >= 0) trip.emplace_back(pos[it.row()], c, it.value());
  return from_triplets(static_cast<int>(rows.size()), static_cast<int>(m.cols()), trip);
}

SparseMatrix select_cols(const SparseMatrix& m, const std::vector<int>& cols) {
  Triplets trip;
  for (int j = 0; j < static_cast<int>(cols.size()); ++j)
    for (SparseMatrix::InnerIterator it(m, cols[j]); it; ++it) trip.emplace_back(it.row(), j, it.value());
  return from_triplets(static_cast<int>(m.rows()), static_cast<int>(cols.size()), trip);
}

WhProjection project_WH(const FeSpace& coarse, const FeSpace& fine, const Eigen::VectorXd& v,
                        const std::vector<Eigen::VectorXd>& enrichment) {
  if (v.size() != fine.size()) throw MismatchedRegion("projection input must be a fine nodal vector");
  return project_WH(coarse, assemble_C(fine, fine).matrix, prolongation(coarse, fine), v, enrichment);
}

WhProjection project_WH(const FeSpace& coarse, const SparseMatrix& c_fine, const SparseMatrix& prolong,
                        const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& enrichment) {
  if (v.size() != c_fine.rows()) throw MismatchedRegion("projection input must be a fine nodal vector");
  const SparseMatrix p = select_cols(prolong, coarse.coupling_dofs());
  const int nw = static_cast<int>(p.cols());
  const int ne = static_cast<int>(enrichment.size());
  const SparseMatrix pt_c = SparseMatrix(p.transpose()) * c_fine;
  Eigen::MatrixXd gram(nw + ne, nw + ne);
  gram.topLeftCorner(nw, nw) = Eigen::MatrixXd(pt_c * p);
  Eigen::VectorXd rhs(nw + ne);
  rhs.head(nw) = pt_c * v;
  for (int k = 0; k < ne; ++k) {
    if (enrichment[k].size() != c_fine.rows()) throw MismatchedRegion("enrichment must be a fine nodal vector");
    const Eigen::VectorXd ce = c_fine * enrichment[k];
    gram.block(0, nw + k, nw, 1) = pt_c * enrichment[k];
    gram.block(nw + k, 0, 1, nw) = gram.block(0, nw + k, nw, 1).transpose();
    for (int l = 0; l < ne; ++l) gram(nw + l, nw + k) = enrichment[l].dot(ce);
    rhs[nw + k] = ce.dot(v);
  }
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-14 * lmax)) throw SingularGram("multiplier Gram matrix is singular");
  const Eigen::VectorXd coef = gram.llt().solve(rhs);
  WhProjection out;
  out.coarse = Eigen::VectorXd::Zero(coarse.size());
  for (int i = 0; i < nw; ++i) out.coarse[coarse.coupling_dofs()[i]] = coef[i];
  out.enrichment = coef.tail(ne);
  return out;
}

void write_coo(std::ostream& os, const SparseMatrix& m) {
  const auto old_precision = os.precision(17);
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(old_precision);
}

}  // namespace arlequin
