#pragma once

#include <array>
#include <string>
#include <vector>

#include "sbfem/mesh.hpp"

namespace sbfem {

/// One mesh edge on the interface, oriented along the interface chain.
struct TraceEdge {
  int edge;   ///< mesh edge index
  int cell;   ///< owning cell
  Vec2 a, b;  ///< endpoints in chain order
  Vec2 normal;  ///< outward unit normal of the owning subdomain
};

/// Piece of the common refinement, lying inside one fluid and one poro edge.
/// Parameters are local to each edge in chain direction, in [0,1].
struct InterfaceSegment {
  int fluid_edge;  ///< index into InterfacePairing::fluid_edges
  int poro_edge;   ///< index into InterfacePairing::poro_edges
  std::array<double, 2> fluid_param;
  std::array<double, 2> poro_param;
  Vec2 a, b;  ///< endpoints on the poro polyline
  double length;
  Vec2 n_f, n_p;
  Vec2 tangent;  ///< unit tangent in chain direction
};

/// Common refinement of the two interface traces. The poro polyline is the
/// master geometry; fluid breakpoints are projected onto it.
struct InterfacePairing {
  std::vector<TraceEdge> fluid_edges;
  std::vector<TraceEdge> poro_edges;
  std::vector<InterfaceSegment> segments;

  double length() const;
};

/// Throws GeometryMismatch if the traces do not describe the same curve
/// (Hausdorff distance above max(1e-10 diam, 2 h_min^2)).
InterfacePairing common_refinement(const Mesh2D& fluid, const Mesh2D& poro,
                                   const std::string& tag = tags::interface);

/// Ordered boundary edges of one mesh carrying `tag`.
std::vector<TraceEdge> trace_chain(const Mesh2D& mesh, const std::string& tag);

struct SegmentPoint {
  Vec2 x;          ///< physical point (poro side)
  double weight;   ///< includes the segment length
  Vec2 ref_f;      ///< preimage in the fluid cell's reference element
  Vec2 ref_p;      ///< preimage in the poro cell's reference element
  double s_f;      ///< parameter along the fluid edge
  double s_p;      ///< parameter along the poro edge
};

/// Gauss points of every segment, exact for 1D polynomials up to `degree`.
/// Throws GeometryMismatch if a preimage falls outside its owning cell.
std::vector<std::vector<SegmentPoint>> segment_quadrature(const InterfacePairing& pairing, const Mesh2D& fluid,
                                                          const Mesh2D& poro, int degree);

/// Discontinuous multiplier space on the poro trace: Legendre functions
/// {1, 2s-1} (order 1) or {1} (order 0) on every poro interface edge.
class MultiplierSpace {
 public:
  MultiplierSpace(const InterfacePairing& pairing, int order);

  int order() const { return order_; }
  int n_local() const { return order_ + 1; }
  int n_dofs() const { return n_edges_ * (order_ + 1); }
  int dof(int poro_edge, int j) const { return poro_edge * (order_ + 1) + j; }
  /// Value of local function j at parameter s of a poro edge.
  static double value(int j, double s) { return j == 0 ? 1.0 : 2.0 * s - 1.0; }

 private:
  int order_;
  int n_edges_;
};

}  // namespace sbfem
