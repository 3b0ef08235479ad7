#include "sbfem/interface.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sbfem/element.hpp"
#include "sbfem/error.hpp"
#include "sbfem/fespace.hpp"
#include "sbfem/quadrature.hpp"

namespace sbfem {

double InterfacePairing::length() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.length;
  return s;
}

std::vector<TraceEdge> trace_chain(const Mesh2D& mesh, const std::string& tag) {
  const auto ids = mesh.boundary_edges_with_tag(tag);
  if (ids.empty()) throw GeometryMismatch("mesh has no edges tagged '" + tag + "'");
  std::map<int, std::vector<int>> touching;
  for (int b : ids) {
    for (int v : mesh.boundary_edges()[b].v) touching[v].push_back(b);
  }
  // Start at the open end with the lexicographically smallest coordinate.
  int start = -1;
  auto smaller = [&](int u, int v) {
    const Vec2 &p = mesh.node(u), &q = mesh.node(v);
    return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
  };
  for (const auto& [v, es] : touching) {
    if (es.size() == 1 && (start < 0 || smaller(v, start))) start = v;
  }
  if (start < 0) start = touching.begin()->first;
  std::vector<TraceEdge> chain;
  std::vector<char> used(mesh.boundary_edges().size(), 0);
  int cur = start;
  while (true) {
    int next_b = -1;
    for (int b : touching[cur]) {
      if (!used[b]) {
        next_b = b;
        break;
      }
    }
    if (next_b < 0) break;
    used[next_b] = 1;
    const auto& bv = mesh.boundary_edges()[next_b].v;
    const int other = bv[0] == cur ? bv[1] : bv[0];
    const int e = mesh.boundary_edge_index(next_b);
    chain.push_back({e, mesh.edges()[e].cells[0], mesh.node(cur), mesh.node(other), edge_outward_normal(mesh, e)});
    cur = other;
  }
  if (chain.size() != ids.size()) throw GeometryMismatch("interface edges tagged '" + tag + "' are not connected");
  return chain;
}

namespace {

// Arclength parameter of the closest point on a polyline.
double project_onto(const std::vector<TraceEdge>& chain, const std::vector<double>& cum, const Vec2& p,
                    double& dist) {
  double best = std::numeric_limits<double>::infinity(), param = 0.0;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const Vec2 d = chain[k].b - chain[k].a;
    const double len2 = d.squaredNorm();
    const double t = std::clamp((p - chain[k].a).dot(d) / len2, 0.0, 1.0);
    const double dd = (p - (chain[k].a + t * d)).norm();
    if (dd < best) {
      best = dd;
      param = cum[k] + t * (cum[k + 1] - cum[k]);
    }
  }
  dist = best;
  return param;
}

// Index k with cum[k] <= s < cum[k+1].
int locate(const std::vector<double>& cum, double s) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  const int k = static_cast<int>(it - cum.begin()) - 1;
  return std::clamp(k, 0, static_cast<int>(cum.size()) - 2);
}

std::vector<Vec2> chain_points(const std::vector<TraceEdge>& c) {
  std::vector<Vec2> pts{c.front().a};
  for (const auto& e : c) pts.push_back(e.b);
  return pts;
}

}  // namespace

InterfacePairing common_refinement(const Mesh2D& fluid, const Mesh2D& poro, const std::string& tag) {
  InterfacePairing out;
  out.poro_edges = trace_chain(poro, tag);
  out.fluid_edges = trace_chain(fluid, tag);
  auto& pe = out.poro_edges;
  auto& fe = out.fluid_edges;
  // Align the fluid chain with the poro chain direction.
  if ((fe.front().a - pe.front().a).norm() > (fe.back().b - pe.front().a).norm()) {
    std::reverse(fe.begin(), fe.end());
    for (auto& e : fe) std::swap(e.a, e.b);
  }
  double h_min = std::numeric_limits<double>::infinity();
  for (const auto& e : pe) h_min = std::min(h_min, (e.b - e.a).norm());
  for (const auto& e : fe) h_min = std::min(h_min, (e.b - e.a).norm());
  const double diam = std::max(fluid.diameter(), poro.diameter());
  const double tol = std::max(1e-10 * diam, 2.0 * h_min * h_min);
  const double gap = hausdorff_distance(chain_points(fe), chain_points(pe));
  if (gap > tol) {
    throw GeometryMismatch("interface traces differ by " + std::to_string(gap) + " (tolerance " + std::to_string(tol) + ")");
  }

  std::vector<double> cum{0.0};
  for (const auto& e : pe) cum.push_back(cum.back() + (e.b - e.a).norm());
  const double L = cum.back();
  const double merge = 1e-12 * L;

  std::vector<double> fcum;
  double dist = 0.0;
  fcum.push_back(project_onto(pe, cum, fe.front().a, dist));
  for (const auto& e : fe) fcum.push_back(project_onto(pe, cum, e.b, dist));
  if (std::abs(fcum.front()) > merge * 1e3 + tol || std::abs(fcum.back() - L) > merge * 1e3 + tol) {
    throw GeometryMismatch("interface traces have different end points");
  }
  fcum.front() = 0.0;
  fcum.back() = L;
  for (std::size_t i = 1; i < fcum.size(); ++i) {
    if (!(fcum[i] > fcum[i - 1])) throw GeometryMismatch("fluid interface trace folds back over the poro trace");
  }

  std::vector<double> breaks(cum);
  breaks.insert(breaks.end(), fcum.begin(), fcum.end());
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> merged;
  for (double s : breaks) {
    if (merged.empty() || s - merged.back() > merge) merged.push_back(s);
  }
  merged.back() = L;

  auto point_at = [&](double s) {
    const int k = locate(cum, s);
    const double t = (s - cum[k]) / (cum[k + 1] - cum[k]);
    return Vec2(pe[k].a + t * (pe[k].b - pe[k].a));
  };
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    const double s0 = merged[i], s1 = merged[i + 1];
    const double sm = 0.5 * (s0 + s1);
    const int kp = locate(cum, sm);
    const int kf = locate(fcum, sm);
    InterfaceSegment seg;
    seg.poro_edge = kp;
    seg.fluid_edge = kf;
    const double lp = cum[kp + 1] - cum[kp], lf = fcum[kf + 1] - fcum[kf];
    seg.poro_param = {std::clamp((s0 - cum[kp]) / lp, 0.0, 1.0), std::clamp((s1 - cum[kp]) / lp, 0.0, 1.0)};
    seg.fluid_param = {std::clamp((s0 - fcum[kf]) / lf, 0.0, 1.0), std::clamp((s1 - fcum[kf]) / lf, 0.0, 1.0)};
    seg.a = point_at(s0);
    seg.b = point_at(s1);
    seg.length = s1 - s0;
    seg.n_p = pe[kp].normal;
    seg.n_f = fe[kf].normal;
    seg.tangent = (pe[kp].b - pe[kp].a).normalized();
    out.segments.push_back(seg);
  }
  return out;
}

namespace {

Vec2 reference_preimage(const Mesh2D& mesh, int cell, const Vec2& x) {
  const CellGeometry geo = CellGeometry::of(mesh, cell);
  Vec2 r = geo.inverse_map(x);
  constexpr double tol = 1e-10;
  if (r.x() < -tol || r.y() < -tol || r.x() + r.y() > 1.0 + tol) {
    throw GeometryMismatch("interface point lies outside its owning cell " + std::to_string(cell));
  }
  r = r.cwiseMax(0.0);
  const double s = r.x() + r.y();
  if (s > 1.0) r /= s;
  return r;
}

}  // namespace

std::vector<std::vector<SegmentPoint>> segment_quadrature(const InterfacePairing& pairing, const Mesh2D& fluid,
                                                          const Mesh2D& poro, int degree) {
  const auto rule = edge_rule(degree);
  std::vector<std::vector<SegmentPoint>> out;
  out.reserve(pairing.segments.size());
  for (const auto& seg : pairing.segments) {
    const auto& fe = pairing.fluid_edges[seg.fluid_edge];
    const auto& pe = pairing.poro_edges[seg.poro_edge];
    std::vector<SegmentPoint> pts;
    pts.reserve(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double u = rule.points[q].x();
      SegmentPoint p;
      p.s_p = seg.poro_param[0] + u * (seg.poro_param[1] - seg.poro_param[0]);
      p.s_f = seg.fluid_param[0] + u * (seg.fluid_param[1] - seg.fluid_param[0]);
      p.x = pe.a + p.s_p * (pe.b - pe.a);
      const Vec2 xf = fe.a + p.s_f * (fe.b - fe.a);
      p.weight = rule.weights[q] * seg.length;
      p.ref_p = reference_preimage(poro, pe.cell, p.x);
      p.ref_f = reference_preimage(fluid, fe.cell, xf);
      pts.push_back(p);
    }
    out.push_back(std::move(pts));
  }
  return out;
}

MultiplierSpace::MultiplierSpace(const InterfacePairing& pairing, int order)
    : order_(order), n_edges_(static_cast<int>(pairing.poro_edges.size())) {
  if (order != 0 && order != 1) throw InvalidArgument("MultiplierSpace: order must be 0 or 1");
}

}  // namespace sbfem
