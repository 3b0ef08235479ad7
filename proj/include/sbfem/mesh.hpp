#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sbfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class Subdomain { fluid, poro };

std::string_view to_string(Subdomain s);
Subdomain subdomain_from_string(std::string_view s);

/// Boundary tags used by the builders in this library. Meshes read from file
/// may carry any lowercase identifier.
namespace tags {
inline constexpr const char* interface = "interface";
inline constexpr const char* wall = "wall";
inline constexpr const char* inflow = "inflow";
inline constexpr const char* left = "left";
inline constexpr const char* right = "right";
inline constexpr const char* top = "top";
inline constexpr const char* bottom = "bottom";
}  // namespace tags

struct Triangle {
  std::array<int, 3> v;
  Subdomain subdomain;
};

struct BoundaryEdge {
  std::array<int, 2> v;
  std::string tag;
};

/// An undirected mesh edge. `v[0] < v[1]`; the global orientation of the edge
/// runs from v[0] to v[1] and its reference normal is the tangent rotated
/// clockwise by 90 degrees.
struct Edge {
  std::array<int, 2> v;
  std::array<int, 2> cells{-1, -1};  ///< second entry is -1 on the boundary
};

/// Triangulation of one subdomain. Immutable once constructed; the
/// constructor validates orientation and conformity and builds edge topology.
class Mesh2D {
 public:
  Mesh2D() = default;
  Mesh2D(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<Edge>& edges() const { return edges_; }

  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  int n_cells() const { return static_cast<int>(triangles_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& node(int i) const { return nodes_[i]; }
  const Triangle& cell(int c) const { return triangles_[c]; }

  /// Local edge k of a cell is opposite local vertex k and runs from
  /// vertex (k+1)%3 to vertex (k+2)%3 (counterclockwise).
  int cell_edge(int c, int k) const { return cell_edges_[c][k]; }
  /// +1 if local edge k of cell c runs along the global edge orientation.
  int cell_edge_sign(int c, int k) const;
  /// Mesh edge index of boundary edge b.
  int boundary_edge_index(int b) const { return bedge_to_edge_[b]; }
  /// Boundary edge index of mesh edge e, or -1.
  int edge_boundary_index(int e) const { return edge_to_bedge_[e]; }

  double cell_area(int c) const;
  Vec2 centroid(int c) const;
  double edge_length(int e) const;
  double max_edge_length() const;
  double diameter() const;

  /// Boundary edges carrying `tag`, in storage order.
  std::vector<int> boundary_edges_with_tag(std::string_view tag) const;

 private:
  void build_topology();

  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<int> bedge_to_edge_;
  std::vector<int> edge_to_bedge_;
};

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

struct Rect {
  double x0, x1, y0, y1;
};

struct SideTags {
  std::string left, right, bottom, top;
};

/// Uniform nx-by-ny grid, each cell split along its (i,j)-(i+1,j+1) diagonal.
Mesh2D build_structured(const Rect& rect, int nx, int ny, Subdomain subdomain,
                        const SideTags& tags);

/// Geometry of the reference fractured reservoir [0,1]x[-1,1]: a half-ellipse
/// x^2 = 200 (0.05 - y)(0.05 + y) attached to the left side is the fluid region.
namespace fracture {
inline constexpr double half_width = 0.05;
inline constexpr double length = 0.70710678118654752440;  // sqrt(0.5)
/// x-coordinate of the fracture wall at height y (|y| <= half_width).
double wall_x(double y);
}  // namespace fracture

struct FractureMeshes {
  Mesh2D fluid;
  Mesh2D poro;
};

/// Fluid mesh of the fracture and poro mesh of the remaining rectangle. The
/// two interface traces share the same node positions. `resolution` is the
/// target edge length along the fracture.
FractureMeshes build_fracture_domain(double resolution);

/// Smooth map of the plane with an evaluable Jacobian.
struct DomainMap {
  std::function<Vec2(const Vec2&)> map;
  std::function<Mat2(const Vec2&)> jacobian;
};

/// x = x^, y = 5 cos((x^+y^)/100) cos^2((pi x^+y^)/100) + y^/2 - x^/10.
DomainMap reservoir_map();

/// Maps node coordinates; throws DegenerateGeometry if a triangle flips.
Mesh2D apply_domain_map(const Mesh2D& mesh, const DomainMap& map);

void write_mesh(const Mesh2D& mesh, const std::string& path);
Mesh2D read_mesh(const std::string& path);

/// Interface polyline of a mesh: boundary edges tagged `tag`, returned as
/// an ordered chain of node coordinates.
std::vector<Vec2> boundary_polyline(const Mesh2D& mesh, std::string_view tag);

/// Symmetric Hausdorff distance between two polylines.
double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

}  // namespace sbfem
