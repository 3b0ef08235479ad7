#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "sbfem/element.hpp"
#include "sbfem/mesh.hpp"
#include "sbfem/quadrature.hpp"
#include "sbfem/sparse.hpp"

namespace sbfem {

using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;

/// Finite element space over one mesh.
///
/// DOF layout:
///   P0        cell c
///   P1        node
///   P1dc      3c + i
///   P2        nodes, then n_nodes + edge
///   P1bubble  nodes, then n_nodes + cell
///   RT0       edge (flux through the edge along its global normal)
///   RT1       2 edge + j (moment against Legendre q_j), then 2 n_edges + 2c + d
///   Vec*      2 s + c for scalar dof s and component c
class FESpace {
 public:
  FESpace(std::shared_ptr<const Mesh2D> mesh, ElementFamily family);

  ElementFamily family() const { return family_; }
  const Mesh2D& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh2D>& mesh_ptr() const { return mesh_; }

  int n_dofs() const { return n_dofs_; }
  int n_local() const { return n_local_; }
  int n_scalar_dofs() const { return is_vector_lagrange(family_) ? n_dofs_ / 2 : n_dofs_; }

  std::span<const int> cell_dofs(int c) const {
    return {dofs_.data() + static_cast<std::size_t>(c) * n_local_, static_cast<std::size_t>(n_local_)};
  }
  /// Local-to-global orientation factors (all +1 for Lagrange families).
  std::span<const double> cell_signs(int c) const {
    return {signs_.data() + static_cast<std::size_t>(c) * n_local_, static_cast<std::size_t>(n_local_)};
  }

  /// Nodal point of a scalar Lagrange dof.
  Vec2 support_point(int scalar_dof) const;

  /// Physical basis values of cell `c` at a reference point, signs applied.
  BasisValues cell_basis(int c, const Vec2& ref_point) const;

  /// Sorted DOFs living on boundary edges carrying `tag`: Lagrange nodal
  /// DOFs (all components) or RT edge moments.
  std::vector<int> boundary_dofs(std::string_view tag) const;

  /// Scalar dofs on tagged boundary edges with the outward unit normals of
  /// the adjacent tagged edges (one per edge touching the dof).
  struct BoundaryNode {
    int scalar_dof;
    std::vector<Vec2> normals;
  };
  std::vector<BoundaryNode> boundary_nodes(std::string_view tag) const;

 private:
  std::shared_ptr<const Mesh2D> mesh_;
  ElementFamily family_;
  int n_local_ = 0;
  int n_dofs_ = 0;
  std::vector<int> dofs_;
  std::vector<double> signs_;
};

/// Outward unit normal of mesh edge `e` with respect to its first cell.
Vec2 edge_outward_normal(const Mesh2D& mesh, int e);

/// max(5, 2 * degree + 3), clipped to the highest supported rule.
int default_quadrature_degree(int max_polynomial_degree);

/// Physical basis values of one space at all quadrature points of a cell.
class CellValues {
 public:
  CellValues(const FESpace& space, QuadratureRule rule);

  void reinit(int cell);

  int cell() const { return cell_; }
  int n_points() const { return static_cast<int>(rule_.size()); }
  int n_local() const { return n_local_; }
  const QuadratureRule& rule() const { return rule_; }
  const CellGeometry& geometry() const { return geo_; }
  std::span<const int> dofs() const { return space_->cell_dofs(cell_); }

  double JxW(int q) const { return jxw_[q]; }
  const Vec2& point(int q) const { return points_[q]; }
  const Vec2& value(int i, int q) const { return value_[idx(i, q)]; }
  const Mat2& grad(int i, int q) const { return grad_[idx(i, q)]; }
  double div(int i, int q) const { return div_[idx(i, q)]; }
  /// Scalar families: value and gradient of the scalar basis function.
  double shape(int i, int q) const { return value_[idx(i, q)].x(); }
  Vec2 shape_grad(int i, int q) const { return grad_[idx(i, q)].row(0).transpose(); }
  /// Symmetric gradient of a vector basis function.
  Mat2 sym_grad(int i, int q) const {
    const Mat2& g = grad_[idx(i, q)];
    return 0.5 * (g + g.transpose());
  }

 private:
  std::size_t idx(int i, int q) const { return static_cast<std::size_t>(q) * n_local_ + i; }

  const FESpace* space_;
  QuadratureRule rule_;
  int n_local_;
  int cell_ = -1;
  std::vector<BasisValues> reference_;
  CellGeometry geo_;
  std::vector<double> jxw_;
  std::vector<Vec2> points_;
  std::vector<Vec2> value_;
  std::vector<Mat2> grad_;
  std::vector<double> div_;
};

/// Value, gradient and divergence of a discrete function at a point of a cell.
struct FieldValue {
  Vec2 value = Vec2::Zero();
  Mat2 grad = Mat2::Zero();
  double div = 0.0;
};
FieldValue evaluate(const FESpace& space, const Vector& coeffs, int cell, const Vec2& ref_point);

/// Consistent mass matrix (value . value).
SparseMatrix mass_matrix(const FESpace& space);

/// L2 projection. The scalar overload requires a scalar family and the
/// vector overload a vector family.
Vector l2_project(const FESpace& space, const ScalarFn& f);
Vector l2_project(const FESpace& space, const VectorFn& f);

/// Coefficients equal to `f` at the nodal points; Lagrange families only.
Vector nodal_interpolate(const FESpace& space, const ScalarFn& f);
Vector nodal_interpolate(const FESpace& space, const VectorFn& f);

/// Canonical RT interpolant: edge moments and interior moments of `f`.
Vector rt_interpolate(const FESpace& space, const VectorFn& f);

/// Canonical interpolant of any vector family (nodal or moment based).
Vector interpolate(const FESpace& space, const VectorFn& f);

}  // namespace sbfem
