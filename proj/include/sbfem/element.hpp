#pragma once

#include <string_view>
#include <vector>

#include "sbfem/mesh.hpp"

namespace sbfem {

enum class ElementFamily { P0, P1, P1dc, P2, P1bubble, RT0, RT1, VecP1, VecP1bubble, VecP2 };

std::string_view to_string(ElementFamily f);

int local_dof_count(ElementFamily f);
bool is_vector_lagrange(ElementFamily f);
bool is_raviart_thomas(ElementFamily f);
bool is_scalar(ElementFamily f);
/// Scalar family of a vector Lagrange family (identity for scalar families).
ElementFamily scalar_family(ElementFamily f);
/// Highest total polynomial degree of the basis.
int polynomial_degree(ElementFamily f);

/// Basis values on the reference triangle. For scalar families only
/// `value[i].x()` and `grad[i].row(0)` are meaningful; for vector families
/// grad(c, d) = d v_c / d x_d.
struct BasisValues {
  std::vector<Vec2> value;
  std::vector<Mat2> grad;
  std::vector<double> div;
};

/// Evaluates all local basis functions of `f` at a point of the closed
/// reference triangle. Vector Lagrange families interleave components
/// (local dof 2i+c is scalar function i in component c). RT families use
/// edge-moment degrees of freedom with counterclockwise edge orientation.
BasisValues eval_basis(ElementFamily f, const Vec2& ref_point);

/// Affine geometry of a physical triangle.
struct CellGeometry {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 jacobian_inv;
  double det = 0.0;

  static CellGeometry of(const Mesh2D& mesh, int cell);
  static CellGeometry of(const Vec2& a, const Vec2& b, const Vec2& c);
  Vec2 map(const Vec2& ref) const { return origin + jacobian * ref; }
  Vec2 inverse_map(const Vec2& x) const { return jacobian_inv * (x - origin); }
};

/// Contravariant Piola transform of reference RT values (in place).
/// Throws DegenerateGeometry if det <= 0.
void piola_map(const CellGeometry& geo, BasisValues& values);

/// Covariant gradient transform for Lagrange families (in place).
void lagrange_map(const CellGeometry& geo, ElementFamily f, BasisValues& values);

}  // namespace sbfem
