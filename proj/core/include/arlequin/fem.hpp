#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "arlequin/coefficients.hpp"
#include "arlequin/geometry.hpp"
#include "arlequin/linear_solver.hpp"

namespace arlequin {

enum class SpaceKind { Coarse, Fine };

// P1 space on the coarse (D u D_c) or fine (D_c u D_f) mesh; dofs are vertices.
class FeSpace {
 public:
  static FeSpace coarse(std::shared_ptr<const DomainMeshes> meshes);
  static FeSpace fine(std::shared_ptr<const DomainMeshes> meshes);

  SpaceKind kind() const { return kind_; }
  const Mesh& mesh() const;
  const DomainMeshes& domain() const { return *meshes_; }
  const std::shared_ptr<const DomainMeshes>& domain_ptr() const { return meshes_; }
  int size() const { return mesh().num_vertices(); }

  // nodes on the outer boundary (coarse space only)
  const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }
  // complement of dirichlet_dofs: the V^0 unknowns
  const std::vector<int>& free_dofs() const { return free_; }
  // nodes in the closure of D_c: W_H or W_h
  const std::vector<int>& coupling_dofs() const { return coupling_; }
  // vertex -> position in free_dofs / coupling_dofs, or -1
  const std::vector<int>& free_index() const { return free_index_; }
  const std::vector<int>& coupling_index() const { return coupling_index_; }

  Eigen::VectorXd interpolate(const std::function<double(const Point&)>& f) const;
  // nodal interpolant of x_direction (direction in {1, 2})
  Eigen::VectorXd linear(int direction) const;

 private:
  FeSpace(SpaceKind kind, std::shared_ptr<const DomainMeshes> meshes);

  SpaceKind kind_;
  std::shared_ptr<const DomainMeshes> meshes_;
  std::vector<int> dirichlet_, free_, coupling_;
  std::vector<int> free_index_, coupling_index_;
};

struct AssembledForm {
  SparseMatrix matrix;
  SpaceKind rows = SpaceKind::Coarse;
  SpaceKind cols = SpaceKind::Coarse;
};

using RegionWeights = std::array<double, 3>;  // indexed by Region

struct ElementGeometry {
  double area;
  Eigen::Matrix<double, 2, 3> grads;  // gradients of the barycentric coordinates
};
ElementGeometry element_geometry(const Mesh& mesh, int t);

// \sum_T w(region) \int_T k_T grad u . grad v ; k == nullptr means identity
SparseMatrix assemble_stiffness(const Mesh& mesh, const RegionWeights& weights,
                                const std::vector<Matrix2>* element_k = nullptr);
SparseMatrix assemble_mass(const Mesh& mesh, const RegionWeights& weights);

// Abar(k) = k11 A11 + k22 A22 + k12 A12, each with the D / half-D_c weights
struct AbarComponents {
  SparseMatrix a11, a22, a12;
  SparseMatrix combine(const Matrix2& kbar) const;
};
AbarComponents abar_components(const FeSpace& coarse);

AssembledForm assemble_Abar(const FeSpace& coarse, const Matrix2& kbar);
AssembledForm assemble_Acheck(const FeSpace& fine, const CoefficientField& field, double eps);
AssembledForm assemble_C(const FeSpace& rows, const FeSpace& cols);

// fine x coarse matrix evaluating coarse functions at fine nodes of the closure of D_c
SparseMatrix prolongation(const FeSpace& coarse, const FeSpace& fine);

struct WhProjection {
  Eigen::VectorXd coarse;      // coarse nodal vector, zero away from the closure of D_c
  Eigen::VectorXd enrichment;  // one coefficient per enrichment vector
};

// H^1(D_c) projection of a fine function onto W_H (+ span of the given fine enrichment vectors)
WhProjection project_WH(const FeSpace& coarse, const FeSpace& fine, const Eigen::VectorXd& v,
                        const std::vector<Eigen::VectorXd>& enrichment = {});
// same, with C on the fine space and the full prolongation already assembled
WhProjection project_WH(const FeSpace& coarse, const SparseMatrix& c_fine, const SparseMatrix& prolong,
                        const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& enrichment = {});

void write_coo(std::ostream& os, const SparseMatrix& m);

SparseMatrix select_rows(const SparseMatrix& m, const std::vector<int>& rows);
SparseMatrix select_cols(const SparseMatrix& m, const std::vector<int>& cols);

}  // namespace arlequin
