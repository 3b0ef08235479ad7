#include "sbfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "sbfem/error.hpp"

namespace sbfem {

std::string_view to_string(Subdomain s) { return s == Subdomain::fluid ? "fluid" : "poro"; }

Subdomain subdomain_from_string(std::string_view s) {
  if (s == "fluid") return Subdomain::fluid;
  if (s == "poro") return Subdomain::poro;
  throw InvalidArgument("unknown subdomain tag '" + std::string(s) + "'");
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Mesh2D::Mesh2D(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
               std::vector<BoundaryEdge> boundary_edges)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
  const int nn = n_nodes();
  for (std::size_t c = 0; c < triangles_.size(); ++c) {
    for (int v : triangles_[c].v) {
      if (v < 0 || v >= nn) throw InvalidArgument("triangle " + std::to_string(c) + " has node index out of range");
    }
    const auto& t = triangles_[c].v;
    if (!(signed_area(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]) > 0.0)) {
      throw DegenerateGeometry("triangle " + std::to_string(c) + " has non-positive signed area");
    }
  }
  for (std::size_t b = 0; b < boundary_edges_.size(); ++b) {
    for (int v : boundary_edges_[b].v) {
      if (v < 0 || v >= nn) throw InvalidArgument("boundary edge " + std::to_string(b) + " has node index out of range");
    }
  }
  build_topology();
}

void Mesh2D::build_topology() {
  std::map<std::pair<int, int>, int> lookup;
  cell_edges_.assign(triangles_.size(), {-1, -1, -1});
  edges_.clear();
  for (int c = 0; c < n_cells(); ++c) {
    const auto& t = triangles_[c].v;
    for (int k = 0; k < 3; ++k) {
      int a = t[(k + 1) % 3];
      int b = t[(k + 2) % 3];
      auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, n_edges());
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.cells = {c, -1};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.cells[1] != -1) {
          throw InvalidArgument("non-conforming mesh: edge (" + std::to_string(a) + "," + std::to_string(b) +
                                ") shared by more than two triangles");
        }
        e.cells[1] = c;
      }
      cell_edges_[c][k] = it->second;
    }
  }
  bedge_to_edge_.assign(boundary_edges_.size(), -1);
  edge_to_bedge_.assign(edges_.size(), -1);
  for (std::size_t b = 0; b < boundary_edges_.size(); ++b) {
    auto key = std::minmax(boundary_edges_[b].v[0], boundary_edges_[b].v[1]);
    auto it = lookup.find({key.first, key.second});
    if (it == lookup.end()) throw InvalidArgument("boundary edge " + std::to_string(b) + " is not a mesh edge");
    const int e = it->second;
    if (edges_[e].cells[1] != -1) throw InvalidArgument("boundary edge " + std::to_string(b) + " is an interior edge");
    if (edge_to_bedge_[e] != -1) throw InvalidArgument("boundary edge " + std::to_string(b) + " listed twice");
    bedge_to_edge_[b] = e;
    edge_to_bedge_[e] = static_cast<int>(b);
  }
  for (int e = 0; e < n_edges(); ++e) {
    if (edges_[e].cells[1] == -1 && edge_to_bedge_[e] == -1) {
      throw InvalidArgument("mesh boundary edge (" + std::to_string(edges_[e].v[0]) + "," +
                            std::to_string(edges_[e].v[1]) + ") carries no boundary tag");
    }
  }
}

int Mesh2D::cell_edge_sign(int c, int k) const {
  const auto& t = triangles_[c].v;
  return t[(k + 1) % 3] < t[(k + 2) % 3] ? 1 : -1;
}

double Mesh2D::cell_area(int c) const {
  const auto& t = triangles_[c].v;
  return signed_area(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
}

Vec2 Mesh2D::centroid(int c) const {
  const auto& t = triangles_[c].v;
  return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
}

double Mesh2D::edge_length(int e) const { return (nodes_[edges_[e].v[1]] - nodes_[edges_[e].v[0]]).norm(); }

double Mesh2D::max_edge_length() const {
  double h = 0.0;
  for (int e = 0; e < n_edges(); ++e) h = std::max(h, edge_length(e));
  return h;
}

double Mesh2D::diameter() const {
  if (nodes_.empty()) return 0.0;
  Vec2 lo = nodes_[0], hi = nodes_[0];
  for (const auto& p : nodes_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::vector<int> Mesh2D::boundary_edges_with_tag(std::string_view tag) const {
  std::vector<int> out;
  for (std::size_t b = 0; b < boundary_edges_.size(); ++b) {
    if (boundary_edges_[b].tag == tag) out.push_back(static_cast<int>(b));
  }
  return out;
}

Mesh2D build_structured(const Rect& rect, int nx, int ny, Subdomain subdomain, const SideTags& side) {
  if (nx < 1 || ny < 1) throw InvalidArgument("build_structured: nx and ny must be >= 1");
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) throw InvalidArgument("build_structured: degenerate rectangle");
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    // Pin the last row/column to the exact rectangle bounds.
    const double y = j == ny ? rect.y1 : rect.y0 + (rect.y1 - rect.y0) * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? rect.x1 : rect.x0 + (rect.x1 - rect.x0) * i / nx;
      nodes.emplace_back(x, y);
    }
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}, subdomain});
      tris.push_back({{id(i, j), id(i + 1, j + 1), id(i, j + 1)}, subdomain});
    }
  }
  std::vector<BoundaryEdge> bedges;
  for (int i = 0; i < nx; ++i) bedges.push_back({{id(i, 0), id(i + 1, 0)}, side.bottom});
  for (int j = 0; j < ny; ++j) bedges.push_back({{id(nx, j), id(nx, j + 1)}, side.right});
  for (int i = nx; i > 0; --i) bedges.push_back({{id(i, ny), id(i - 1, ny)}, side.top});
  for (int j = ny; j > 0; --j) bedges.push_back({{id(0, j), id(0, j - 1)}, side.left});
  return Mesh2D(std::move(nodes), std::move(tris), std::move(bedges));
}

namespace fracture {
double wall_x(double y) { return std::sqrt(std::max(0.0, 200.0 * (half_width - y) * (half_width + y))); }
}  // namespace fracture

namespace {

// Splits quad (a,b,c,d), given counterclockwise, along its shorter diagonal.
void push_quad(std::vector<Triangle>& tris, const std::vector<Vec2>& x, int a, int b, int c, int d,
               Subdomain s) {
  if ((x[a] - x[c]).squaredNorm() <= (x[b] - x[d]).squaredNorm()) {
    tris.push_back({{a, b, c}, s});
    tris.push_back({{a, c, d}, s});
  } else {
    tris.push_back({{a, b, d}, s});
    tris.push_back({{b, c, d}, s});
  }
}

}  // namespace

FractureMeshes build_fracture_domain(double resolution) {
  using fracture::half_width;
  using fracture::length;
  if (!(resolution > 0.0)) throw InvalidArgument("build_fracture_domain: resolution must be positive");
  if (resolution > half_width) {
    throw InvalidArgument("build_fracture_domain: resolution too coarse to resolve the fracture half-width 0.05");
  }
  // n columns along the fracture (even, so the outer corners land on nodes),
  // m rows across it.
  int n = std::max(4, static_cast<int>(std::ceil(length / resolution)));
  if (n % 2) ++n;
  const int m = std::max(2, static_cast<int>(std::ceil(2.0 * half_width / resolution)));
  const double pi = std::numbers::pi;

  // Interface nodes, elliptic-angle parameterisation: x = a sin(phi), y = +-b cos(phi).
  std::vector<Vec2> curve;  // top wall from (0,b) to the tip, then bottom wall back to (0,-b)
  for (int k = 0; k <= 2 * n; ++k) {
    const int i = k <= n ? k : 2 * n - k;
    const double phi = 0.5 * pi * i / n;
    const double x = i == n ? length : length * std::sin(phi);
    const double y = i == n ? 0.0 : half_width * std::cos(phi) * (k <= n ? 1.0 : -1.0);
    curve.emplace_back(x, y);
  }

  // Fluid mesh: column i has m+1 nodes from bottom to top; the tip is a single node.
  std::vector<Vec2> fx;
  std::vector<std::vector<int>> col(n + 1);
  for (int i = 0; i < n; ++i) {
    const Vec2& top = curve[i];
    for (int j = 0; j <= m; ++j) {
      const double y = j == 0 ? -top.y() : (j == m ? top.y() : top.y() * (2.0 * j / m - 1.0));
      col[i].push_back(static_cast<int>(fx.size()));
      fx.emplace_back(top.x(), y);
    }
  }
  col[n].push_back(static_cast<int>(fx.size()));
  fx.push_back(curve[n]);
  std::vector<Triangle> ftris;
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < m; ++j) {
      push_quad(ftris, fx, col[i][j], col[i + 1][j], col[i + 1][j + 1], col[i][j + 1], Subdomain::fluid);
    }
  }
  for (int j = 0; j < m; ++j) ftris.push_back({{col[n - 1][j], col[n][0], col[n - 1][j + 1]}, Subdomain::fluid});
  std::vector<BoundaryEdge> fb;
  for (int j = m; j > 0; --j) fb.push_back({{col[0][j], col[0][j - 1]}, tags::inflow});
  for (int i = 0; i + 1 < n; ++i) fb.push_back({{col[i][0], col[i + 1][0]}, tags::interface});
  fb.push_back({{col[n - 1][0], col[n][0]}, tags::interface});
  fb.push_back({{col[n][0], col[n - 1][m]}, tags::interface});
  for (int i = n - 1; i > 0; --i) fb.push_back({{col[i][m], col[i - 1][m]}, tags::interface});

  // Poro mesh: blend from the interface curve (l = 0) to the C-shaped outer
  // boundary (l = nr), layers clustered toward the fracture.
  const int nr = n;
  const int half = n / 2;
  auto outer = [&](int k) -> Vec2 {
    if (k <= half) return {static_cast<double>(k) / half, 1.0};
    if (k <= 3 * half) return {1.0, 1.0 - static_cast<double>(k - half) / half};
    return {1.0 - static_cast<double>(k - 3 * half) / half, -1.0};
  };
  std::vector<Vec2> px;
  auto pid = [nr](int k, int l) { return k * (nr + 1) + l; };
  for (int k = 0; k <= 2 * n; ++k) {
    const Vec2 in = curve[k];
    const Vec2 out = outer(k);
    for (int l = 0; l <= nr; ++l) {
      const double r = std::pow(static_cast<double>(l) / nr, 1.5);
      px.push_back(l == 0 ? in : (l == nr ? out : Vec2((1.0 - r) * in + r * out)));
    }
  }
  std::vector<Triangle> ptris;
  for (int k = 0; k < 2 * n; ++k) {
    for (int l = 0; l < nr; ++l) {
      push_quad(ptris, px, pid(k, l), pid(k + 1, l), pid(k + 1, l + 1), pid(k, l + 1), Subdomain::poro);
    }
  }
  std::vector<BoundaryEdge> pb;
  for (int k = 2 * n; k > 0; --k) pb.push_back({{pid(k, 0), pid(k - 1, 0)}, tags::interface});
  for (int l = 0; l < nr; ++l) pb.push_back({{pid(0, l + 1), pid(0, l)}, tags::left});
  for (int k = 0; k < 2 * n; ++k) {
    const char* tag = k < half ? tags::top : (k < 3 * half ? tags::right : tags::bottom);
    pb.push_back({{pid(k, nr), pid(k + 1, nr)}, tag});
  }
  for (int l = nr; l > 0; --l) pb.push_back({{pid(2 * n, l - 1), pid(2 * n, l)}, tags::left});

  return {Mesh2D(std::move(fx), std::move(ftris), std::move(fb)),
          Mesh2D(std::move(px), std::move(ptris), std::move(pb))};
}

DomainMap reservoir_map() {
  const double pi = std::numbers::pi;
  DomainMap m;
  m.map = [pi](const Vec2& p) {
    const double a = (p.x() + p.y()) / 100.0;
    const double b = (pi * p.x() + p.y()) / 100.0;
    const double cb = std::cos(b);
    return Vec2(p.x(), 5.0 * std::cos(a) * cb * cb + p.y() / 2.0 - p.x() / 10.0);
  };
  m.jacobian = [pi](const Vec2& p) {
    const double a = (p.x() + p.y()) / 100.0;
    const double b = (pi * p.x() + p.y()) / 100.0;
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    // d/da and d/db of 5 cos(a) cos(b)^2
    const double dfa = -5.0 * sa * cb * cb;
    const double dfb = -10.0 * ca * cb * sb;
    Mat2 j;
    j << 1.0, 0.0, (dfa + pi * dfb) / 100.0 - 0.1, (dfa + dfb) / 100.0 + 0.5;
    return j;
  };
  return m;
}

Mesh2D apply_domain_map(const Mesh2D& mesh, const DomainMap& map) {
  std::vector<Vec2> nodes;
  nodes.reserve(mesh.nodes().size());
  for (const auto& p : mesh.nodes()) {
    if (!(map.jacobian(p).determinant() > 0.0)) {
      throw DegenerateGeometry("domain map has non-positive Jacobian determinant at a mesh node");
    }
    nodes.push_back(map.map(p));
  }
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cell(c).v;
    if (!(signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) > 0.0)) {
      throw DegenerateGeometry("mapped triangle " + std::to_string(c) + " has non-positive area");
    }
  }
  return Mesh2D(std::move(nodes), mesh.triangles(), mesh.boundary_edges());
}

void write_mesh(const Mesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "mesh2d 1\n";
  out << mesh.n_nodes() << ' ' << mesh.n_cells() << ' ' << mesh.boundary_edges().size() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.nodes()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) {
    out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << to_string(t.subdomain) << '\n';
  }
  for (const auto& b : mesh.boundary_edges()) out << b.v[0] << ' ' << b.v[1] << ' ' << b.tag << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

namespace {

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_';
  });
}

}  // namespace

Mesh2D read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* what) -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, std::string("unexpected end of file, expected ") + what);
    ++lineno;
    return std::istringstream(line);
  };
  auto finish = [&](std::istringstream& s) {
    std::string extra;
    if (s >> extra) throw ParseError(lineno, "trailing content '" + extra + "'");
  };
  {
    auto s = next("header");
    std::string magic;
    int version = 0;
    if (!(s >> magic >> version) || magic != "mesh2d" || version != 1) {
      throw ParseError(lineno, "malformed header, expected 'mesh2d 1'");
    }
    finish(s);
  }
  long nn = 0, nt = 0, nb = 0;
  {
    auto s = next("counts");
    if (!(s >> nn >> nt >> nb) || nn < 0 || nt < 0 || nb < 0) throw ParseError(lineno, "malformed count line");
    finish(s);
  }
  std::vector<Vec2> nodes(static_cast<std::size_t>(nn));
  for (auto& p : nodes) {
    auto s = next("node");
    double x, y;
    if (!(s >> x >> y)) throw ParseError(lineno, "malformed node line");
    if (!std::isfinite(x) || !std::isfinite(y)) throw ParseError(lineno, "non-finite coordinate");
    finish(s);
    p = {x, y};
  }
  std::vector<Triangle> tris(static_cast<std::size_t>(nt));
  for (auto& t : tris) {
    auto s = next("triangle");
    long i, j, k;
    std::string tag;
    if (!(s >> i >> j >> k >> tag)) throw ParseError(lineno, "malformed triangle line");
    finish(s);
    for (long v : {i, j, k}) {
      if (v < 0 || v >= nn) throw ParseError(lineno, "node index " + std::to_string(v) + " out of range");
    }
    try {
      t = {{static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)}, subdomain_from_string(tag)};
    } catch (const InvalidArgument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  std::vector<BoundaryEdge> bedges(static_cast<std::size_t>(nb));
  for (auto& b : bedges) {
    auto s = next("boundary edge");
    long i, j;
    std::string tag;
    if (!(s >> i >> j >> tag)) throw ParseError(lineno, "malformed boundary edge line");
    finish(s);
    for (long v : {i, j}) {
      if (v < 0 || v >= nn) throw ParseError(lineno, "node index " + std::to_string(v) + " out of range");
    }
    if (!is_identifier(tag)) throw ParseError(lineno, "boundary tag '" + tag + "' is not a lowercase identifier");
    b = {{static_cast<int>(i), static_cast<int>(j)}, tag};
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw ParseError(lineno, "unexpected trailing line");
  }
  try {
    return Mesh2D(std::move(nodes), std::move(tris), std::move(bedges));
  } catch (const std::exception& e) {
    throw ParseError(0, e.what());
  }
}

std::vector<Vec2> boundary_polyline(const Mesh2D& mesh, std::string_view tag) {
  const auto ids = mesh.boundary_edges_with_tag(tag);
  if (ids.empty()) return {};
  std::map<int, std::vector<int>> adj;
  for (int b : ids) {
    const auto& v = mesh.boundary_edges()[b].v;
    adj[v[0]].push_back(v[1]);
    adj[v[1]].push_back(v[0]);
  }
  // Start at an open end; prefer the lexicographically smallest coordinate.
  int start = -1;
  for (const auto& [node, nb] : adj) {
    if (nb.size() > 2) throw GeometryMismatch("tagged boundary edges do not form a simple chain");
    if (nb.size() == 1) {
      const Vec2& p = mesh.node(node);
      if (start < 0 || p.x() < mesh.node(start).x() ||
          (p.x() == mesh.node(start).x() && p.y() < mesh.node(start).y())) {
        start = node;
      }
    }
  }
  if (start < 0) start = adj.begin()->first;
  std::vector<Vec2> chain{mesh.node(start)};
  int prev = -1, cur = start;
  for (std::size_t step = 0; step < ids.size(); ++step) {
    const auto& nb = adj[cur];
    int nxt = nb[0] != prev ? nb[0] : (nb.size() > 1 ? nb[1] : -1);
    if (nxt < 0) break;
    prev = cur;
    cur = nxt;
    chain.push_back(mesh.node(cur));
  }
  if (chain.size() != ids.size() + 1) {
    throw GeometryMismatch("tagged boundary edges are not connected");
  }
  return chain;
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const Vec2 r = p - a;
  const double t = r.dot(d) / len2;
  if (t <= 0.0) return r.norm();
  if (t >= 1.0) return (p - b).norm();
  // Cross-product form is exact for collinear input.
  return std::abs(d.x() * r.y() - d.y() * r.x()) / std::sqrt(len2);
}

double directed_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  constexpr int samples = 8;
  double worst = 0.0;
  auto dist_to_b = [&](const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    if (b.size() == 1) return (p - b[0]).norm();
    for (std::size_t i = 0; i + 1 < b.size(); ++i) best = std::min(best, point_segment_distance(p, b[i], b[i + 1]));
    return best;
  };
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    for (int s = 0; s <= samples; ++s) {
      const double t = static_cast<double>(s) / samples;
      worst = std::max(worst, dist_to_b((1.0 - t) * a[i] + t * a[i + 1]));
    }
  }
  if (a.size() == 1) worst = dist_to_b(a[0]);
  return worst;
}

}  // namespace

double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

}  // namespace sbfem
