#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "sbfem/element.hpp"
#include "sbfem/error.hpp"
#include "sbfem/interface.hpp"

namespace sbfem {
namespace {

Mesh2D fluid_square(int n, double shift = 0.0) {
  return build_structured({0, 1, shift, 1}, n, n, Subdomain::fluid, {tags::wall, tags::wall, tags::interface, tags::wall});
}
Mesh2D poro_square(int n) {
  return build_structured({0, 1, -1, 0}, n, n, Subdomain::poro, {tags::left, tags::right, tags::bottom, tags::interface});
}

// Breakpoints of two uniform partitions of [0,1], merged by brute force.
std::vector<double> overlay_oracle(int a, int b) {
  std::vector<double> pts;
  for (int i = 0; i <= a; ++i) pts.push_back(static_cast<double>(i) / a);
  for (int j = 0; j <= b; ++j) pts.push_back(static_cast<double>(j) / b);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > 1e-9) out.push_back(p);
  }
  return out;
}

TEST(Interface, MatchingGridsGiveOneSegmentPerEdge) {
  const auto pr = common_refinement(fluid_square(8), poro_square(8));
  EXPECT_EQ(pr.segments.size(), 8u);
  for (const auto& s : pr.segments) {
    EXPECT_DOUBLE_EQ(s.fluid_param[0], 0.0);
    EXPECT_DOUBLE_EQ(s.fluid_param[1], 1.0);
  }
}

TEST(Interface, NonMatchingOverlayMatchesOracle) {
  const auto pr = common_refinement(fluid_square(5), poro_square(8));
  const auto oracle = overlay_oracle(5, 8);
  ASSERT_EQ(pr.segments.size(), oracle.size() - 1);
  EXPECT_GE(pr.segments.size(), 8u);
  EXPECT_LE(pr.segments.size(), 12u);
  std::vector<double> xs;
  for (const auto& s : pr.segments) xs.push_back(std::min(s.a.x(), s.b.x()));
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(xs[i], oracle[i], 1e-14);
  EXPECT_NEAR(pr.length(), 1.0, 1e-12);
}

TEST(Interface, SubIntervalsTileEachEdge) {
  const auto pr = common_refinement(fluid_square(5), poro_square(8));
  std::vector<double> fcover(pr.fluid_edges.size(), 0.0), pcover(pr.poro_edges.size(), 0.0);
  for (const auto& s : pr.segments) {
    EXPECT_GT(s.fluid_param[1], s.fluid_param[0]);
    EXPECT_GT(s.poro_param[1], s.poro_param[0]);
    fcover[s.fluid_edge] += s.fluid_param[1] - s.fluid_param[0];
    pcover[s.poro_edge] += s.poro_param[1] - s.poro_param[0];
  }
  for (double c : fcover) EXPECT_NEAR(c, 1.0, 1e-12);
  for (double c : pcover) EXPECT_NEAR(c, 1.0, 1e-12);
}

TEST(Interface, OverlayIsSymmetric) {
  const auto ab = common_refinement(fluid_square(5), poro_square(8));
  const Mesh2D f8 = build_structured({0, 1, 0, 1}, 8, 8, Subdomain::fluid, {tags::wall, tags::wall, tags::interface, tags::wall});
  const Mesh2D p5 = build_structured({0, 1, -1, 0}, 5, 5, Subdomain::poro, {tags::left, tags::right, tags::bottom, tags::interface});
  const auto ba = common_refinement(f8, p5);
  ASSERT_EQ(ab.segments.size(), ba.segments.size());
  std::multiset<std::pair<double, double>> sa, sb;
  auto key = [](const InterfaceSegment& s) {
    return std::make_pair(std::round(std::min(s.a.x(), s.b.x()) * 1e12), std::round(std::max(s.a.x(), s.b.x()) * 1e12));
  };
  for (const auto& s : ab.segments) sa.insert(key(s));
  for (const auto& s : ba.segments) sb.insert(key(s));
  EXPECT_EQ(sa, sb);
}

TEST(Interface, NormalsAreOpposite) {
  const auto [f, p] = build_fracture_domain(0.02);
  const auto pr = common_refinement(f, p);
  for (const auto& s : pr.segments) {
    EXPECT_LT((s.n_f + s.n_p).norm(), 1e-8);
    EXPECT_NEAR(s.n_p.dot(s.tangent), 0.0, 1e-14);
  }
  const auto flat = common_refinement(fluid_square(5), poro_square(8));
  for (const auto& s : flat.segments) {
    EXPECT_EQ(s.n_f, Vec2(0, -1));
    EXPECT_EQ(s.n_p, Vec2(0, 1));
  }
}

TEST(Interface, FractureLengthMatchesPolyline) {
  const auto [f, p] = build_fracture_domain(0.02);
  const auto pr = common_refinement(f, p);
  double poly = 0.0;
  for (const auto& e : pr.poro_edges) poly += (e.b - e.a).norm();
  double fpoly = 0.0;
  for (const auto& e : pr.fluid_edges) fpoly += (e.b - e.a).norm();
  EXPECT_NEAR(pr.length(), poly, 1e-10 * poly);
  EXPECT_NEAR(pr.length(), fpoly, 1e-10 * poly);
}

TEST(Interface, QuadratureIntegratesLineIntegrals) {
  const Mesh2D f = fluid_square(5), p = poro_square(8);
  const auto pr = common_refinement(f, p);
  const auto q1 = segment_quadrature(pr, f, p, 1);
  double len = 0.0;
  for (std::size_t s = 0; s < q1.size(); ++s) {
    ASSERT_EQ(q1[s].size(), 1u);
    EXPECT_NEAR(q1[s][0].weight, pr.segments[s].length, 1e-15);
    EXPECT_NEAR((q1[s][0].x - 0.5 * (pr.segments[s].a + pr.segments[s].b)).norm(), 0.0, 1e-15);
    len += q1[s][0].weight;
  }
  EXPECT_NEAR(len, 1.0, 1e-12);
  for (int k = 0; k <= 9; ++k) {
    const auto q = segment_quadrature(pr, f, p, 9);
    double s = 0.0;
    for (const auto& seg : q) {
      for (const auto& pt : seg) s += std::pow(pt.x.x(), k) * pt.weight;
    }
    EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << k;
  }
}

TEST(Interface, PreimagesAgree) {
  for (double res : {0.05, 0.02}) {
    const auto [f, p] = build_fracture_domain(res);
    const auto pr = common_refinement(f, p);
    const auto q = segment_quadrature(pr, f, p, 5);
    for (std::size_t s = 0; s < q.size(); ++s) {
      for (const auto& pt : q[s]) {
        const Vec2 xf = CellGeometry::of(f, pr.fluid_edges[pr.segments[s].fluid_edge].cell).map(pt.ref_f);
        const Vec2 xp = CellGeometry::of(p, pr.poro_edges[pr.segments[s].poro_edge].cell).map(pt.ref_p);
        EXPECT_LT((xf - xp).norm(), 1e-10);
      }
    }
  }
  const Mesh2D f = fluid_square(5), p = poro_square(8);
  const auto pr = common_refinement(f, p);
  const auto q = segment_quadrature(pr, f, p, 4);
  for (std::size_t s = 0; s < q.size(); ++s) {
    for (const auto& pt : q[s]) {
      const Vec2 xf = CellGeometry::of(f, pr.fluid_edges[pr.segments[s].fluid_edge].cell).map(pt.ref_f);
      EXPECT_LT((xf - pt.x).norm(), 1e-14);
    }
  }
}

TEST(Interface, ProductOfTracesFromBothSides) {
  // f = x^a evaluated on the fluid side, g = x^b on the poro side.
  const Mesh2D f = fluid_square(5), p = poro_square(8);
  const auto pr = common_refinement(f, p);
  const auto q = segment_quadrature(pr, f, p, 8);
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; b <= 4; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < q.size(); ++k) {
        const auto gf = CellGeometry::of(f, pr.fluid_edges[pr.segments[k].fluid_edge].cell);
        const auto gp = CellGeometry::of(p, pr.poro_edges[pr.segments[k].poro_edge].cell);
        for (const auto& pt : q[k]) s += std::pow(gf.map(pt.ref_f).x(), a) * std::pow(gp.map(pt.ref_p).x(), b) * pt.weight;
      }
      EXPECT_NEAR(s, 1.0 / (a + b + 1), 1e-12 / (a + b + 1));
    }
  }
}

TEST(Interface, MismatchedTracesThrow) {
  EXPECT_THROW(common_refinement(fluid_square(4, 0.2), poro_square(4)), GeometryMismatch);
}

TEST(Interface, MultiplierDimension) {
  const auto pr = common_refinement(fluid_square(5), poro_square(8));
  EXPECT_EQ(MultiplierSpace(pr, 0).n_dofs(), 8);
  EXPECT_EQ(MultiplierSpace(pr, 1).n_dofs(), 16);
  EXPECT_THROW(MultiplierSpace(pr, 2), InvalidArgument);
}

}  // namespace
}  // namespace sbfem
