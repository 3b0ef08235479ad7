#pragma once

#include <vector>

#include "sbfem/mesh.hpp"

namespace sbfem {

/// Quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1}
/// (weights sum to 1/2) or on the unit interval (points stored in x, weights
/// sum to 1).
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Collapsed Gauss-Legendre product rule exact for polynomials of total
/// degree <= `degree`; 1 <= degree <= 10.
QuadratureRule triangle_rule(int degree);

/// Gauss-Legendre rule on [0,1] exact up to `degree`; 1 <= degree <= 10.
QuadratureRule edge_rule(int degree);

/// Gauss-Legendre nodes and weights on [0,1] with `n` points.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace sbfem
