#include "arlequin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "arlequin/errors.hpp"

namespace arlequin {

void DomainSpec::validate() const {
  if (!(L_f > 0.0) || !(L_f < L_c) || !(L_c < L)) {
    std::ostringstream msg;
    msg << "need 0 < L_f < L_c < L, got L=" << L << " L_c=" << L_c << " L_f=" << L_f;
    throw DegenerateSpec(msg.str());
  }
}

const char* to_string(Region r) {
  switch (r) {
    case Region::D: return "D";
    case Region::Dc: return "Dc";
    case Region::Df: return "Df";
  }
  return "?";
}

const char* to_string(EdgeTag t) {
  switch (t) {
    case EdgeTag::Interior: return "interior";
    case EdgeTag::Gamma: return "Gamma";
    case EdgeTag::GammaC: return "GammaC";
    case EdgeTag::GammaF: return "GammaF";
  }
  return "?";
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Point a = vertices[tri[1]] - vertices[tri[0]];
  const Point b = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

Point Mesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh::region_area(Region r) const {
  double area = 0.0;
  for (int t = 0; t < num_triangles(); ++t)
    if (regions[t] == r) area += triangle_area(t);
  return area;
}

EdgeTag Mesh::edge_tag(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(tagged_edges.begin(), tagged_edges.end(), std::make_pair(a, b),
                             [](const TaggedEdge& e, const std::pair<int, int>& key) {
                               return std::make_pair(e.v0, e.v1) < key;
                             });
  if (it != tagged_edges.end() && it->v0 == a && it->v1 == b) return it->tag;
  return EdgeTag::Interior;
}

std::vector<char> Mesh::region_closure_mask(Region r) const {
  std::vector<char> mask(vertices.size(), 0);
  for (int t = 0; t < num_triangles(); ++t)
    if (regions[t] == r)
      for (int v : triangles[t]) mask[v] = 1;
  return mask;
}

int exact_cell_count(double length, double step, const char* what) {
  if (!(step > 0.0)) throw NonDivisibleGeometry(std::string(what) + ": mesh size must be positive");
  const double ratio = length / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << what << ": " << step << " does not divide " << length;
    throw NonDivisibleGeometry(msg.str());
  }
  return static_cast<int>(n);
}

namespace {

double max_norm(const Point& p) { return std::max(std::abs(p.x()), std::abs(p.y())); }

struct Grid {
  double origin;  // lower-left coordinate in both directions
  double step;
  int cells;      // per direction
};

// Structured mesh over the cells of `grid` accepted by `region_of` (returns false to skip).
template <class RegionFn>
Mesh structured_mesh(const Grid& grid, RegionFn region_of, std::vector<int>* cell_triangle) {
  const int n = grid.cells;
  const int nv = n + 1;
  auto coord = [&](int i) { return grid.origin + grid.step * i; };

  std::vector<Region> cell_region(static_cast<size_t>(n) * n);
  std::vector<char> cell_used(static_cast<size_t>(n) * n, 0);
  std::vector<char> vertex_used(static_cast<size_t>(nv) * nv, 0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point c(coord(i) + 0.5 * grid.step, coord(j) + 0.5 * grid.step);
      Region r{};
      if (!region_of(c, r)) continue;
      const size_t cell = static_cast<size_t>(j) * n + i;
      cell_used[cell] = 1;
      cell_region[cell] = r;
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) vertex_used[static_cast<size_t>(j + dj) * nv + i + di] = 1;
    }
  }

  Mesh mesh;
  mesh.spacing = grid.step;
  std::vector<int> vertex_id(vertex_used.size(), -1);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nv; ++i) {
      const size_t k = static_cast<size_t>(j) * nv + i;
      if (!vertex_used[k]) continue;
      vertex_id[k] = mesh.num_vertices();
      mesh.vertices.emplace_back(coord(i), coord(j));
    }

  if (cell_triangle) cell_triangle->assign(static_cast<size_t>(n) * n, -1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const size_t cell = static_cast<size_t>(j) * n + i;
      if (!cell_used[cell]) continue;
      const int v00 = vertex_id[static_cast<size_t>(j) * nv + i];
      const int v10 = vertex_id[static_cast<size_t>(j) * nv + i + 1];
      const int v11 = vertex_id[static_cast<size_t>(j + 1) * nv + i + 1];
      const int v01 = vertex_id[static_cast<size_t>(j + 1) * nv + i];
      if (cell_triangle) (*cell_triangle)[cell] = mesh.num_triangles();
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
      mesh.regions.push_back(cell_region[cell]);
      mesh.regions.push_back(cell_region[cell]);
    }
  return mesh;
}

void tag_edges(Mesh& mesh, const DomainSpec& spec) {
  std::map<std::pair<int, int>, std::vector<int>> adjacency;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      adjacency[{a, b}].push_back(t);
    }
  }
  const double tol = 1e-9 * spec.L;
  const std::array<std::pair<double, EdgeTag>, 3> squares{
      {{spec.L, EdgeTag::Gamma}, {spec.L_c, EdgeTag::GammaC}, {spec.L_f, EdgeTag::GammaF}}};
  for (const auto& [edge, tris] : adjacency) {
    const Point& a = mesh.vertices[edge.first];
    const Point& b = mesh.vertices[edge.second];
    const Point mid = 0.5 * (a + b);
    EdgeTag tag = EdgeTag::Interior;
    for (const auto& [s, t] : squares) {
      if (std::abs(max_norm(a) - s) < tol && std::abs(max_norm(b) - s) < tol &&
          std::abs(max_norm(mid) - s) < tol) {
        tag = t;
        break;
      }
    }
    if (tag == EdgeTag::Interior) {
      if (tris.size() != 2) throw DegenerateSpec("untagged boundary edge in structured mesh");
      continue;
    }
    TaggedEdge te{edge.first, edge.second, tag, -1};
    for (int t : tris)
      if (mesh.regions[t] == Region::Dc) te.dc_triangle = t;
    mesh.tagged_edges.push_back(te);
  }
}

}  // namespace

std::shared_ptr<const DomainMeshes> build_domain(const DomainSpec& spec, double H, int refine_ratio) {
  spec.validate();
  if (refine_ratio < 2) throw InvalidParameter("refine ratio must be >= 2");
  exact_cell_count(spec.L - spec.L_c, H, "L - L_c");
  exact_cell_count(spec.L_c - spec.L_f, H, "L_c - L_f");
  exact_cell_count(2.0 * spec.L_f, H, "2 L_f");
  const int n_coarse = exact_cell_count(2.0 * spec.L, H, "2 L");

  auto out = std::make_shared<DomainMeshes>();
  out->spec = spec;
  out->H = H;
  out->refine_ratio = refine_ratio;

  const Grid coarse_grid{-spec.L, 2.0 * spec.L / n_coarse, n_coarse};
  std::vector<int> coarse_cell_triangle;
  out->coarse = structured_mesh(
      coarse_grid,
      [&](const Point& c, Region& r) {
        const double m = max_norm(c);
        if (m < spec.L_f) return false;
        r = m < spec.L_c ? Region::Dc : Region::D;
        return true;
      },
      &coarse_cell_triangle);

  const int fine_cells = exact_cell_count(2.0 * spec.L_c, H / refine_ratio, "2 L_c");
  const Grid fine_grid{-spec.L_c, 2.0 * spec.L_c / fine_cells, fine_cells};
  out->fine = structured_mesh(
      fine_grid,
      [&](const Point& c, Region& r) {
        r = max_norm(c) < spec.L_f ? Region::Df : Region::Dc;
        return true;
      },
      nullptr);

  tag_edges(out->coarse, spec);
  tag_edges(out->fine, spec);

  auto& map = out->map;
  map.parent.assign(out->fine.num_triangles(), -1);
  map.children.assign(out->coarse.num_triangles(), {});
  for (int t = 0; t < out->fine.num_triangles(); ++t) {
    if (out->fine.regions[t] != Region::Dc) continue;
    const Point c = out->fine.centroid(t);
    const double gx = (c.x() - coarse_grid.origin) / coarse_grid.step;
    const double gy = (c.y() - coarse_grid.origin) / coarse_grid.step;
    const int i = static_cast<int>(std::floor(gx));
    const int j = static_cast<int>(std::floor(gy));
    const int first = coarse_cell_triangle[static_cast<size_t>(j) * n_coarse + i];
    if (first < 0 || out->coarse.regions[first] != Region::Dc)
      throw MismatchedRegion("fine D_c triangle outside coarse D_c");
    const int parent = (gy - j) <= (gx - i) ? first : first + 1;
    map.parent[t] = parent;
    map.children[parent].push_back(t);
  }
  return out;
}

Eigen::VectorXd boundary_integral_weights(const Mesh& mesh, EdgeTag tag, const Eigen::Vector2d& direction) {
  if (tag != EdgeTag::GammaC && tag != EdgeTag::GammaF)
    throw UnknownTag(std::string("boundary weights need GammaC or GammaF, got ") + to_string(tag));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (const auto& e : mesh.tagged_edges) {
    if (e.tag != tag) continue;
    if (e.dc_triangle < 0) throw MismatchedRegion("tagged edge without a D_c neighbour");
    const Point& a = mesh.vertices[e.v0];
    const Point& b = mesh.vertices[e.v1];
    int third = -1;
    for (int v : mesh.triangles[e.dc_triangle])
      if (v != e.v0 && v != e.v1) third = v;
    const Point d = b - a;
    const double len = d.norm();
    Point n(d.y() / len, -d.x() / len);
    if (n.dot(mesh.vertices[third] - a) > 0.0) n = -n;
    const double half = 0.5 * len * direction.dot(n);
    w[e.v0] += half;
    w[e.v1] += half;
  }
  return w;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old_precision = os.precision(17);
  os << "# vertices " << mesh.num_vertices() << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v)
    os << v << ' ' << mesh.vertices[v].x() << ' ' << mesh.vertices[v].y() << '\n';
  os << "# triangles " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << to_string(mesh.regions[t]) << '\n';
  }
  os << "# edges " << mesh.tagged_edges.size() << "\n";
  for (const auto& e : mesh.tagged_edges) os << e.v0 << ' ' << e.v1 << ' ' << to_string(e.tag) << '\n';
  os.precision(old_precision);
}

}  // namespace arlequin
