#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace arlequin {

using Point = Eigen::Vector2d;

struct DomainSpec {
  double L = 4.0;
  double L_c = 2.0;
  double L_f = 1.0;

  void validate() const;
  double area_D() const { return 4.0 * (L * L - L_c * L_c); }
  double area_Dc() const { return 4.0 * (L_c * L_c - L_f * L_f); }
  double area_Df() const { return 4.0 * L_f * L_f; }
};

enum class Region : std::uint8_t { D = 0, Dc = 1, Df = 2 };
enum class EdgeTag : std::uint8_t { Interior = 0, Gamma = 1, GammaC = 2, GammaF = 3 };

const char* to_string(Region r);
const char* to_string(EdgeTag t);

struct TaggedEdge {
  int v0 = 0;
  int v1 = 0;
  EdgeTag tag = EdgeTag::Interior;
  // triangle on the D_c side; -1 when the edge has no D_c neighbour
  int dc_triangle = -1;
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Region> regions;
  std::vector<TaggedEdge> tagged_edges;
  double spacing = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
  Point centroid(int t) const;
  double region_area(Region r) const;
  EdgeTag edge_tag(int a, int b) const;
  std::vector<char> region_closure_mask(Region r) const;
};

struct SubmeshMap {
  std::vector<int> parent;                 // fine triangle -> coarse triangle, -1 in D_f
  std::vector<std::vector<int>> children;  // coarse triangle -> fine triangles, empty outside D_c
};

struct DomainMeshes {
  DomainSpec spec;
  double H = 0.0;
  int refine_ratio = 0;
  Mesh coarse;
  Mesh fine;
  SubmeshMap map;

  double h() const { return H / refine_ratio; }
};

std::shared_ptr<const DomainMeshes> build_domain(const DomainSpec& spec, double H, int refine_ratio);

// w with w^T phi = \int_{tag} (direction . n) phi, n outward from D_c
Eigen::VectorXd boundary_integral_weights(const Mesh& mesh, EdgeTag tag, const Eigen::Vector2d& direction);

void write_mesh(std::ostream& os, const Mesh& mesh);

// number of grid cells of size `step` in `length`; throws when not an integer
int exact_cell_count(double length, double step, const char* what);

}  // namespace arlequin
