#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include "sbfem/error.hpp"
#include "sbfem/fespace.hpp"

namespace sbfem {
namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Mesh2D> unit_square(int n) {
  return std::make_shared<const Mesh2D>(
      build_structured({0, 1, 0, 1}, n, n, Subdomain::poro, {"left", "right", "bottom", "top"}));
}

// A mildly distorted mesh to exercise non-trivial Piola maps.
std::shared_ptr<const Mesh2D> distorted_square(int n) {
  const Mesh2D m = build_structured({0, 1, 0, 1}, n, n, Subdomain::poro, {"left", "right", "bottom", "top"});
  DomainMap map;
  map.map = [](const Vec2& p) {
    return Vec2(p.x() + 0.05 * std::sin(kPi * p.x()) * std::sin(kPi * p.y()), p.y() + 0.03 * std::sin(2 * kPi * p.x()) * p.y());
  };
  map.jacobian = [](const Vec2&) { return Mat2::Identity(); };
  return std::make_shared<const Mesh2D>(apply_domain_map(m, map));
}

TEST(FESpace, DofCounts) {
  auto m = unit_square(4);
  const int nn = 25, nc = 32, ne = m->n_edges();
  EXPECT_EQ(ne, 56);
  EXPECT_EQ(FESpace(m, ElementFamily::P0).n_dofs(), nc);
  EXPECT_EQ(FESpace(m, ElementFamily::P1).n_dofs(), nn);
  EXPECT_EQ(FESpace(m, ElementFamily::P1dc).n_dofs(), 3 * nc);
  EXPECT_EQ(FESpace(m, ElementFamily::P2).n_dofs(), nn + ne);
  EXPECT_EQ(FESpace(m, ElementFamily::P1bubble).n_dofs(), nn + nc);
  EXPECT_EQ(FESpace(m, ElementFamily::RT0).n_dofs(), ne);
  EXPECT_EQ(FESpace(m, ElementFamily::RT1).n_dofs(), 2 * ne + 2 * nc);
  EXPECT_EQ(FESpace(m, ElementFamily::VecP2).n_dofs(), 2 * (nn + ne));
}

TEST(FESpace, CellDofsInRangeAndSharedAcrossEdges) {
  auto m = unit_square(3);
  for (auto f : {ElementFamily::P1, ElementFamily::P2, ElementFamily::P1bubble, ElementFamily::RT1, ElementFamily::VecP2,
                 ElementFamily::P1dc}) {
    FESpace V(m, f);
    std::vector<int> count(V.n_dofs(), 0);
    for (int c = 0; c < m->n_cells(); ++c) {
      for (int d : V.cell_dofs(c)) {
        ASSERT_GE(d, 0);
        ASSERT_LT(d, V.n_dofs());
        ++count[d];
      }
    }
    for (int n : count) EXPECT_GE(n, 1);
    if (f == ElementFamily::P1dc) {
      for (int n : count) EXPECT_EQ(n, 1);
    }
  }
}

TEST(FESpace, PolynomialReproductionUnderNodalInterpolation) {
  auto m = distorted_square(3);
  auto lin = [](const Vec2& x) { return 0.3 + 2.0 * x.x() - 1.5 * x.y(); };
  auto quad = [](const Vec2& x) { return 0.3 + x.x() * x.x() - 0.7 * x.x() * x.y() + 1.1 * x.y() * x.y() - x.y(); };
  const Vec2 refs[] = {Vec2(0.2, 0.2), Vec2(0.6, 0.1), Vec2(0.1, 0.5)};
  auto check = [&](ElementFamily f, const ScalarFn& g) {
    FESpace V(m, f);
    const Vector c = nodal_interpolate(V, g);
    for (int cell = 0; cell < m->n_cells(); ++cell) {
      const CellGeometry geo = CellGeometry::of(*m, cell);
      for (const auto& r : refs) EXPECT_NEAR(evaluate(V, c, cell, r).value.x(), g(geo.map(r)), 1e-14) << to_string(f);
    }
  };
  check(ElementFamily::P1, lin);
  check(ElementFamily::P1dc, lin);
  check(ElementFamily::P1bubble, lin);
  check(ElementFamily::P2, lin);
  check(ElementFamily::P2, quad);
  FESpace V(m, ElementFamily::P1);
  EXPECT_EQ(nodal_interpolate(V, [](const Vec2&) { return 0.0; }).norm(), 0.0);
}

TEST(FESpace, NodalInterpolationRejectsRt) {
  FESpace V(unit_square(2), ElementFamily::RT0);
  EXPECT_THROW(nodal_interpolate(V, VectorFn([](const Vec2&) { return Vec2(1, 0); })), InvalidArgument);
}

TEST(FESpace, RtInterpolantReproducesItsSpace) {
  auto m = distorted_square(3);
  // RT0 contains a + b x; RT1 contains P1^2 + x P1.
  auto f0 = [](const Vec2& x) { return Vec2(0.4 + 0.5 * x.x(), -0.2 + 0.5 * x.y()); };
  auto f1 = [](const Vec2& x) {
    return Vec2(0.3 + x.x() - 2 * x.y() + x.x() * (x.x() - x.y()), 1.0 + 0.5 * x.x() + x.y() + x.y() * (x.x() - x.y()));
  };
  const Vec2 refs[] = {Vec2(0.2, 0.2), Vec2(0.6, 0.1), Vec2(0.1, 0.5)};
  for (auto [f, g] : {std::pair<ElementFamily, VectorFn>{ElementFamily::RT0, f0}, {ElementFamily::RT1, f1}}) {
    FESpace V(m, f);
    const Vector c = rt_interpolate(V, g);
    for (int cell = 0; cell < m->n_cells(); ++cell) {
      const CellGeometry geo = CellGeometry::of(*m, cell);
      for (const auto& r : refs) EXPECT_NEAR((evaluate(V, c, cell, r).value - g(geo.map(r))).norm(), 0.0, 1e-13);
    }
  }
}

TEST(FESpace, RtNormalTracesAreSingleValued) {
  auto m = distorted_square(4);
  auto g = [](const Vec2& x) { return Vec2(std::sin(3 * x.x()) * x.y(), std::exp(x.x() - x.y())); };
  for (auto f : {ElementFamily::RT0, ElementFamily::RT1}) {
    FESpace V(m, f);
    const Vector c = rt_interpolate(V, g);
    double jump = 0.0, scale = 0.0;
    for (int e = 0; e < m->n_edges(); ++e) {
      const Edge& ed = m->edges()[e];
      if (ed.cells[1] < 0) continue;
      const Vec2 a = m->node(ed.v[0]), b = m->node(ed.v[1]);
      const Vec2 t = b - a;
      const Vec2 n = Vec2(t.y(), -t.x()).normalized();
      for (double s : {0.1, 0.5, 0.9}) {
        const Vec2 x = a + s * t;
        double tr[2];
        for (int side = 0; side < 2; ++side) {
          const int cell = ed.cells[side];
          tr[side] = evaluate(V, c, cell, CellGeometry::of(*m, cell).inverse_map(x)).value.dot(n);
        }
        jump = std::max(jump, std::abs(tr[0] - tr[1]));
        scale = std::max(scale, std::abs(tr[0]));
      }
    }
    EXPECT_LT(jump, 1e-12 * scale) << to_string(f);
  }
}

TEST(FESpace, MassMatricesAreSpd) {
  auto m = distorted_square(3);
  for (auto f : {ElementFamily::P0, ElementFamily::P1, ElementFamily::P1dc, ElementFamily::P2, ElementFamily::P1bubble,
                 ElementFamily::RT0, ElementFamily::RT1, ElementFamily::VecP1, ElementFamily::VecP1bubble,
                 ElementFamily::VecP2}) {
    const SparseMatrix M = mass_matrix(FESpace(m, f));
    EXPECT_LT((M - SparseMatrix(M.transpose())).norm(), 1e-15 * M.norm()) << to_string(f);
    Eigen::SimplicialLLT<SparseMatrix> llt(M);
    EXPECT_EQ(llt.info(), Eigen::Success) << to_string(f);
  }
}

TEST(FESpace, ProjectionOfConstant) {
  FESpace V(unit_square(4), ElementFamily::P0);
  const Vector c = l2_project(V, [](const Vec2&) { return 1000.0; });
  for (int i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 1000.0, 1e-10);
}

TEST(FESpace, P0ProjectionOfSineMatchesCellAverages) {
  const int n = 4;
  const double h = 1.0 / n;
  auto m = unit_square(n);
  FESpace V(m, ElementFamily::P0);
  const Vector c = l2_project(V, [](const Vec2& x) { return std::sin(kPi * x.x()); });
  // Antiderivative of sin(pi x) (x - x0).
  auto F = [](double x, double x0) { return -(x - x0) * std::cos(kPi * x) / kPi + std::sin(kPi * x) / (kPi * kPi); };
  auto G = [](double x) { return -std::cos(kPi * x) / kPi; };
  const double area = 0.5 * h * h;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x0 = i * h;
      const double lower = F(x0 + h, x0) - F(x0, x0);                  // region y - y0 <= x - x0
      const double upper = h * (G(x0 + h) - G(x0)) - lower;             // the complement
      EXPECT_NEAR(c[2 * (j * n + i)], lower / area, 1e-13);
      EXPECT_NEAR(c[2 * (j * n + i) + 1], upper / area, 1e-13);
    }
  }
}

TEST(FESpace, ProjectionIsIdempotentAndOrthogonal) {
  auto m = distorted_square(3);
  FESpace V(m, ElementFamily::P2);
  auto f = [](const Vec2& x) { return std::exp(x.x()) * std::cos(2 * x.y()); };
  const Vector c = l2_project(V, f);
  const Vector c2 = l2_project(V, [&](const Vec2& x) {
    for (int cell = 0; cell < m->n_cells(); ++cell) {
      const auto geo = CellGeometry::of(*m, cell);
      const Vec2 r = geo.inverse_map(x);
      if (r.x() >= -1e-13 && r.y() >= -1e-13 && r.x() + r.y() <= 1 + 1e-13) return evaluate(V, c, cell, r).value.x();
    }
    return 0.0;
  });
  EXPECT_LT((c - c2).norm(), 1e-12 * c.norm());
}

TEST(FESpace, VectorProjectionReproducesRt1Field) {
  auto m = distorted_square(2);
  FESpace V(m, ElementFamily::RT1);
  auto g = [](const Vec2& x) { return Vec2(1.0 + x.x() * x.x(), x.x() * x.y() - 2.0); };
  EXPECT_LT((l2_project(V, VectorFn(g)) - rt_interpolate(V, g)).norm(), 1e-11);
}

TEST(FESpace, ProjectionTypeGuards) {
  FESpace V(unit_square(2), ElementFamily::RT0);
  EXPECT_THROW(l2_project(V, ScalarFn([](const Vec2&) { return 1.0; })), InvalidArgument);
  FESpace W(unit_square(2), ElementFamily::P0);
  EXPECT_THROW(l2_project(W, VectorFn([](const Vec2&) { return Vec2(1, 0); })), InvalidArgument);
}

TEST(FESpace, BoundaryDofsOnTaggedSides) {
  auto m = unit_square(4);
  FESpace V(m, ElementFamily::VecP2);
  const auto d = V.boundary_dofs("bottom");
  EXPECT_EQ(d.size(), 2u * 9u);  // 5 vertices + 4 midpoints, two components
  for (int dof : d) EXPECT_NEAR(V.support_point(dof / 2).y(), 0.0, 0.0);
  FESpace R(m, ElementFamily::RT1);
  EXPECT_EQ(R.boundary_dofs("left").size(), 8u);
  const auto nodes = FESpace(m, ElementFamily::P1).boundary_nodes("right");
  ASSERT_EQ(nodes.size(), 5u);
  for (const auto& bn : nodes) {
    for (const auto& n : bn.normals) EXPECT_NEAR((n - Vec2(1, 0)).norm(), 0.0, 1e-15);
  }
}

TEST(CellValues, MatchesDirectEvaluation) {
  auto m = distorted_square(2);
  for (auto f : {ElementFamily::RT1, ElementFamily::VecP1bubble, ElementFamily::P2}) {
    FESpace V(m, f);
    const auto rule = triangle_rule(4);
    CellValues cv(V, rule);
    for (int c = 0; c < m->n_cells(); ++c) {
      cv.reinit(c);
      for (int q = 0; q < cv.n_points(); ++q) {
        const auto b = V.cell_basis(c, rule.points[q]);
        for (int i = 0; i < V.n_local(); ++i) {
          EXPECT_NEAR((cv.value(i, q) - b.value[i]).norm(), 0.0, 1e-14);
          EXPECT_NEAR((cv.grad(i, q) - b.grad[i]).norm(), 0.0, 1e-12);
          EXPECT_NEAR(cv.div(i, q), b.div[i], 1e-12);
        }
      }
    }
  }
}

}  // namespace
}  // namespace sbfem
