#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "sbfem/error.hpp"
#include "sbfem/mesh.hpp"

namespace sbfem {
namespace {

const SideTags kWall{tags::wall, tags::wall, tags::wall, tags::wall};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("sbfem_test_" + name)).string();
}

TEST(Mesh, StructuredCounts) {
  const Mesh2D m = build_structured({0, 1, 0, 1}, 8, 8, Subdomain::fluid, kWall);
  EXPECT_EQ(m.n_nodes(), 81);
  EXPECT_EQ(m.n_cells(), 128);
  EXPECT_EQ(m.boundary_edges().size(), 32u);
  for (int c = 0; c < m.n_cells(); ++c) EXPECT_GT(m.cell_area(c), 0.0);
}

TEST(Mesh, StructuredGuards) {
  EXPECT_THROW(build_structured({0, 1, 0, 1}, 0, 8, Subdomain::fluid, kWall), InvalidArgument);
  EXPECT_THROW(build_structured({0, 1, 0, 1}, 8, -1, Subdomain::fluid, kWall), InvalidArgument);
  EXPECT_THROW(build_structured({0, 0, 0, 1}, 2, 2, Subdomain::fluid, kWall), InvalidArgument);
}

TEST(Mesh, StructuredMaxEdgeLengthIsDiagonal) {
  const Mesh2D m = build_structured({0, 2, -1, 0}, 4, 5, Subdomain::poro, kWall);
  const double dx = 0.5, dy = 0.2;
  EXPECT_DOUBLE_EQ(m.max_edge_length(), std::max({dx, dy, std::hypot(dx, dy)}));
}

TEST(Mesh, EdgesAreSharedByAtMostTwoCells) {
  const Mesh2D m = build_structured({0, 1, 0, 1}, 5, 3, Subdomain::fluid, kWall);
  int boundary = 0;
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edges()[e].cells[1] < 0) {
      ++boundary;
      EXPECT_GE(m.edge_boundary_index(e), 0);
    }
  }
  EXPECT_EQ(boundary, 16);
}

TEST(Mesh, NonMatchingInterfaceNodes) {
  const Mesh2D f = build_structured({0, 1, 0, 1}, 5, 5, Subdomain::fluid,
                                    {tags::wall, tags::wall, tags::interface, tags::wall});
  const Mesh2D p = build_structured({0, 1, -1, 0}, 8, 8, Subdomain::poro,
                                    {tags::left, tags::right, tags::bottom, tags::interface});
  const auto a = boundary_polyline(f, tags::interface);
  const auto b = boundary_polyline(p, tags::interface);
  std::set<double> xa, xb;
  for (const auto& v : a) xa.insert(v.x());
  for (const auto& v : b) xb.insert(v.x());
  EXPECT_NE(xa, xb);
  EXPECT_EQ(hausdorff_distance(a, b), 0.0);
}

TEST(Mesh, RejectsInvalidTriangles) {
  std::vector<Vec2> x{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  EXPECT_THROW(Mesh2D(x, {{{0, 2, 1}, Subdomain::fluid}}, {}), DegenerateGeometry);
  EXPECT_THROW(Mesh2D(x, {{{0, 1, 3}, Subdomain::fluid}}, {}), InvalidArgument);
}

TEST(Mesh, FractureCurveFormula) {
  EXPECT_NEAR(fracture::wall_x(0.0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(fracture::wall_x(0.0), 0.70711, 1e-5);
  EXPECT_EQ(fracture::wall_x(0.05), 0.0);
  EXPECT_EQ(fracture::wall_x(-0.05), 0.0);
}

TEST(Mesh, FractureDomain) {
  const auto [f, p] = build_fracture_domain(0.02);
  for (const auto& x : f.nodes()) {
    EXPECT_LE(x.x() * x.x(), 200.0 * (0.05 - x.y()) * (0.05 + x.y()) + 1e-12);
  }
  const auto a = boundary_polyline(f, tags::interface);
  const auto b = boundary_polyline(p, tags::interface);
  EXPECT_LT(hausdorff_distance(a, b), 1e-10 * p.diameter());
  double area_f = 0.0, area_p = 0.0;
  for (int c = 0; c < f.n_cells(); ++c) area_f += f.cell_area(c);
  for (int c = 0; c < p.n_cells(); ++c) area_p += p.cell_area(c);
  // Fracture area is pi a b / 2 up to polyline error.
  const double ellipse = 0.5 * std::acos(-1.0) * std::sqrt(0.5) * 0.05;
  EXPECT_NEAR(area_f, ellipse, 0.02 * ellipse);
  EXPECT_NEAR(area_f + area_p, 2.0, 1e-12);
  EXPECT_FALSE(f.boundary_edges_with_tag(tags::inflow).empty());
  for (const char* t : {tags::left, tags::top, tags::right, tags::bottom}) {
    EXPECT_FALSE(p.boundary_edges_with_tag(t).empty()) << t;
  }
}

TEST(Mesh, FractureResolutionGuard) {
  EXPECT_THROW(build_fracture_domain(0.1), InvalidArgument);
  EXPECT_THROW(build_fracture_domain(0.0), InvalidArgument);
}

TEST(Mesh, ReservoirMap) {
  const auto map = reservoir_map();
  EXPECT_NEAR((map.map(Vec2(0, 0)) - Vec2(0, 5)).norm(), 0.0, 1e-15);
  const double h = 1e-6;
  for (const Vec2 p : {Vec2(0.3, -0.4), Vec2(0.9, 0.7)}) {
    Mat2 fd;
    fd.col(0) = (map.map(p + Vec2(h, 0)) - map.map(p - Vec2(h, 0))) / (2 * h);
    fd.col(1) = (map.map(p + Vec2(0, h)) - map.map(p - Vec2(0, h))) / (2 * h);
    EXPECT_LT((fd - map.jacobian(p)).norm(), 1e-8);
  }
}

TEST(Mesh, MappedFractureDomainKeepsStructure) {
  const auto [f, p] = build_fracture_domain(0.04);
  const auto map = reservoir_map();
  const Mesh2D mp = apply_domain_map(p, map);
  EXPECT_EQ(mp.n_nodes(), p.n_nodes());
  EXPECT_EQ(mp.n_cells(), p.n_cells());
  EXPECT_EQ(mp.n_edges(), p.n_edges());
  double min_area = 1e300;
  for (int c = 0; c < mp.n_cells(); ++c) min_area = std::min(min_area, mp.cell_area(c));
  EXPECT_GT(min_area, 0.0);
  for (int i = 0; i < p.n_nodes(); ++i) EXPECT_EQ(mp.node(i).x(), p.node(i).x());
  for (std::size_t b = 0; b < p.boundary_edges().size(); ++b) EXPECT_EQ(mp.boundary_edges()[b].tag, p.boundary_edges()[b].tag);
}

TEST(Mesh, MapThatFlipsThrows) {
  const Mesh2D m = build_structured({0, 1, 0, 1}, 2, 2, Subdomain::fluid, kWall);
  DomainMap flip{[](const Vec2& x) { return Vec2(-x.x(), x.y()); }, [](const Vec2&) {
                   Mat2 j;
                   j << -1, 0, 0, 1;
                   return j;
                 }};
  EXPECT_THROW(apply_domain_map(m, flip), DegenerateGeometry);
}

TEST(Mesh, RoundTrip) {
  const auto [f, p] = build_fracture_domain(0.04);
  const std::string path = temp_path("roundtrip.mesh");
  write_mesh(p, path);
  const Mesh2D q = read_mesh(path);
  std::remove(path.c_str());
  ASSERT_EQ(q.n_nodes(), p.n_nodes());
  ASSERT_EQ(q.n_cells(), p.n_cells());
  for (int i = 0; i < p.n_nodes(); ++i) EXPECT_EQ(q.node(i), p.node(i));
  for (int c = 0; c < p.n_cells(); ++c) {
    EXPECT_EQ(q.cell(c).v, p.cell(c).v);
    EXPECT_EQ(q.cell(c).subdomain, p.cell(c).subdomain);
  }
  ASSERT_EQ(q.boundary_edges().size(), p.boundary_edges().size());
  for (std::size_t b = 0; b < p.boundary_edges().size(); ++b) {
    EXPECT_EQ(q.boundary_edges()[b].v, p.boundary_edges()[b].v);
    EXPECT_EQ(q.boundary_edges()[b].tag, p.boundary_edges()[b].tag);
  }
}

std::size_t parse_error_line(const std::string& contents) {
  const std::string path = temp_path("bad.mesh");
  {
    std::ofstream out(path);
    out << contents;
  }
  try {
    read_mesh(path);
  } catch (const ParseError& e) {
    std::remove(path.c_str());
    return e.line();
  }
  std::remove(path.c_str());
  return 999;
}

TEST(Mesh, ParseErrors) {
  EXPECT_EQ(parse_error_line(""), 1u);
  EXPECT_EQ(parse_error_line("mesh3d 1\n"), 1u);
  EXPECT_EQ(parse_error_line("mesh2d 1\n3 1 0\n0 0\n1 0\n0 1\n0 1 3 fluid\n"), 6u);
  EXPECT_EQ(parse_error_line("mesh2d 1\n3 1 0\n0 0\nnan 0\n0 1\n0 1 2 fluid\n"), 4u);
}

}  // namespace
}  // namespace sbfem
