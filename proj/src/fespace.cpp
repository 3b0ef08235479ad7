#include "sbfem/fespace.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>

#include "sbfem/error.hpp"

namespace sbfem {

FESpace::FESpace(std::shared_ptr<const Mesh2D> mesh, ElementFamily family)
    : mesh_(std::move(mesh)), family_(family), n_local_(local_dof_count(family)) {
  if (!mesh_) throw InvalidArgument("FESpace: null mesh");
  const Mesh2D& m = *mesh_;
  const int nc = m.n_cells(), nn = m.n_nodes(), ne = m.n_edges();
  const ElementFamily sf = scalar_family(family);
  const int n_scalar_local = local_dof_count(sf);
  dofs_.assign(static_cast<std::size_t>(nc) * n_local_, -1);
  signs_.assign(dofs_.size(), 1.0);

  if (family == ElementFamily::RT0 || family == ElementFamily::RT1) {
    const bool high = family == ElementFamily::RT1;
    n_dofs_ = high ? 2 * ne + 2 * nc : ne;
    for (int c = 0; c < nc; ++c) {
      int* d = dofs_.data() + static_cast<std::size_t>(c) * n_local_;
      double* s = signs_.data() + static_cast<std::size_t>(c) * n_local_;
      for (int k = 0; k < 3; ++k) {
        const int e = m.cell_edge(c, k);
        const double sg = m.cell_edge_sign(c, k);
        if (!high) {
          d[k] = e;
          s[k] = sg;
        } else {
          d[2 * k] = 2 * e;
          s[2 * k] = sg;
          d[2 * k + 1] = 2 * e + 1;
          s[2 * k + 1] = 1.0;
        }
      }
      if (high) {
        d[6] = 2 * ne + 2 * c;
        d[7] = 2 * ne + 2 * c + 1;
      }
    }
    return;
  }

  int n_scalar = 0;
  std::vector<int> sdofs(static_cast<std::size_t>(nc) * n_scalar_local);
  for (int c = 0; c < nc; ++c) {
    int* d = sdofs.data() + static_cast<std::size_t>(c) * n_scalar_local;
    const auto& t = m.cell(c).v;
    switch (sf) {
      case ElementFamily::P0: d[0] = c; break;
      case ElementFamily::P1:
        for (int i = 0; i < 3; ++i) d[i] = t[i];
        break;
      case ElementFamily::P1dc:
        for (int i = 0; i < 3; ++i) d[i] = 3 * c + i;
        break;
      case ElementFamily::P2:
        for (int i = 0; i < 3; ++i) d[i] = t[i];
        for (int k = 0; k < 3; ++k) d[3 + k] = nn + m.cell_edge(c, k);
        break;
      case ElementFamily::P1bubble:
        for (int i = 0; i < 3; ++i) d[i] = t[i];
        d[3] = nn + c;
        break;
      default: throw InvalidArgument("FESpace: unsupported family");
    }
  }
  switch (sf) {
    case ElementFamily::P0: n_scalar = nc; break;
    case ElementFamily::P1: n_scalar = nn; break;
    case ElementFamily::P1dc: n_scalar = 3 * nc; break;
    case ElementFamily::P2: n_scalar = nn + ne; break;
    case ElementFamily::P1bubble: n_scalar = nn + nc; break;
    default: break;
  }
  if (is_vector_lagrange(family)) {
    n_dofs_ = 2 * n_scalar;
    for (std::size_t c = 0; c < static_cast<std::size_t>(nc); ++c) {
      for (int i = 0; i < n_scalar_local; ++i) {
        for (int comp = 0; comp < 2; ++comp) {
          dofs_[c * n_local_ + 2 * i + comp] = 2 * sdofs[c * n_scalar_local + i] + comp;
        }
      }
    }
  } else {
    n_dofs_ = n_scalar;
    dofs_ = std::move(sdofs);
  }
}

Vec2 FESpace::support_point(int s) const {
  const Mesh2D& m = *mesh_;
  const int nn = m.n_nodes();
  if (s < 0 || s >= n_scalar_dofs()) throw OutOfBounds("support_point: dof out of range");
  switch (scalar_family(family_)) {
    case ElementFamily::P0: return m.centroid(s);
    case ElementFamily::P1: return m.node(s);
    case ElementFamily::P1dc: return m.node(m.cell(s / 3).v[s % 3]);
    case ElementFamily::P2: {
      if (s < nn) return m.node(s);
      const auto& e = m.edges()[s - nn];
      return 0.5 * (m.node(e.v[0]) + m.node(e.v[1]));
    }
    case ElementFamily::P1bubble: return s < nn ? m.node(s) : m.centroid(s - nn);
    default: throw InvalidArgument("support_point: not a Lagrange family");
  }
}

BasisValues FESpace::cell_basis(int c, const Vec2& ref_point) const {
  BasisValues v = eval_basis(family_, ref_point);
  const CellGeometry geo = CellGeometry::of(*mesh_, c);
  if (is_raviart_thomas(family_)) {
    piola_map(geo, v);
    const auto s = cell_signs(c);
    for (int i = 0; i < n_local_; ++i) {
      v.value[i] *= s[i];
      v.grad[i] *= s[i];
      v.div[i] *= s[i];
    }
  } else {
    lagrange_map(geo, family_, v);
  }
  return v;
}

Vec2 edge_outward_normal(const Mesh2D& mesh, int e) {
  const Edge& ed = mesh.edges()[e];
  const Vec2 a = mesh.node(ed.v[0]), b = mesh.node(ed.v[1]);
  const Vec2 t = b - a;
  Vec2 n(t.y(), -t.x());
  n.normalize();
  if ((0.5 * (a + b) - mesh.centroid(ed.cells[0])).dot(n) < 0.0) n = -n;
  return n;
}

std::vector<FESpace::BoundaryNode> FESpace::boundary_nodes(std::string_view tag) const {
  if (is_raviart_thomas(family_)) throw InvalidArgument("boundary_nodes: not a Lagrange family");
  const Mesh2D& m = *mesh_;
  const ElementFamily sf = scalar_family(family_);
  std::map<int, std::vector<Vec2>> acc;
  for (int b : m.boundary_edges_with_tag(tag)) {
    const int e = m.boundary_edge_index(b);
    const Vec2 n = edge_outward_normal(m, e);
    const Edge& ed = m.edges()[e];
    switch (sf) {
      case ElementFamily::P1:
      case ElementFamily::P1bubble:
        acc[ed.v[0]].push_back(n);
        acc[ed.v[1]].push_back(n);
        break;
      case ElementFamily::P2:
        acc[ed.v[0]].push_back(n);
        acc[ed.v[1]].push_back(n);
        acc[m.n_nodes() + e].push_back(n);
        break;
      case ElementFamily::P1dc: {
        const int c = ed.cells[0];
        for (int i = 0; i < 3; ++i) {
          const int v = m.cell(c).v[i];
          if (v == ed.v[0] || v == ed.v[1]) acc[3 * c + i].push_back(n);
        }
        break;
      }
      default: break;
    }
  }
  std::vector<BoundaryNode> out;
  out.reserve(acc.size());
  for (auto& [s, normals] : acc) out.push_back({s, std::move(normals)});
  return out;
}

std::vector<int> FESpace::boundary_dofs(std::string_view tag) const {
  std::vector<int> out;
  const Mesh2D& m = *mesh_;
  if (is_raviart_thomas(family_)) {
    for (int b : m.boundary_edges_with_tag(tag)) {
      const int e = m.boundary_edge_index(b);
      if (family_ == ElementFamily::RT0) {
        out.push_back(e);
      } else {
        out.push_back(2 * e);
        out.push_back(2 * e + 1);
      }
    }
  } else {
    const int ncomp = is_vector_lagrange(family_) ? 2 : 1;
    for (const auto& bn : boundary_nodes(tag)) {
      for (int c = 0; c < ncomp; ++c) out.push_back(ncomp * bn.scalar_dof + c);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int default_quadrature_degree(int max_polynomial_degree) {
  return std::min(10, std::max(5, 2 * max_polynomial_degree + 3));
}

CellValues::CellValues(const FESpace& space, QuadratureRule rule)
    : space_(&space), rule_(std::move(rule)), n_local_(space.n_local()) {
  reference_.reserve(rule_.size());
  for (const auto& p : rule_.points) reference_.push_back(eval_basis(space.family(), p));
  const std::size_t n = rule_.size() * n_local_;
  jxw_.resize(rule_.size());
  points_.resize(rule_.size());
  value_.resize(n);
  grad_.resize(n);
  div_.resize(n);
}

void CellValues::reinit(int cell) {
  cell_ = cell;
  geo_ = CellGeometry::of(space_->mesh(), cell);
  if (!(geo_.det > 0.0)) throw DegenerateGeometry("CellValues: non-positive Jacobian on cell " + std::to_string(cell));
  const ElementFamily f = space_->family();
  const bool rt = is_raviart_thomas(f);
  const bool vec = is_vector_lagrange(f);
  const auto signs = space_->cell_signs(cell);
  const Mat2& J = geo_.jacobian;
  const Mat2& Ji = geo_.jacobian_inv;
  const double inv_det = 1.0 / geo_.det;
  for (std::size_t q = 0; q < rule_.size(); ++q) {
    jxw_[q] = rule_.weights[q] * geo_.det;
    points_[q] = geo_.map(rule_.points[q]);
    const BasisValues& r = reference_[q];
    for (int i = 0; i < n_local_; ++i) {
      const std::size_t k = idx(i, static_cast<int>(q));
      if (rt) {
        const double s = signs[i] * inv_det;
        value_[k] = s * (J * r.value[i]);
        grad_[k] = s * (J * r.grad[i] * Ji);
        div_[k] = s * r.div[i];
      } else {
        value_[k] = r.value[i];
        grad_[k] = r.grad[i] * Ji;
        div_[k] = vec ? grad_[k].trace() : 0.0;
      }
    }
  }
}

FieldValue evaluate(const FESpace& space, const Vector& coeffs, int cell, const Vec2& ref_point) {
  const BasisValues b = space.cell_basis(cell, ref_point);
  const auto dofs = space.cell_dofs(cell);
  FieldValue out;
  for (int i = 0; i < space.n_local(); ++i) {
    const double x = coeffs[dofs[i]];
    out.value += x * b.value[i];
    out.grad += x * b.grad[i];
    out.div += x * b.div[i];
  }
  return out;
}

SparseMatrix mass_matrix(const FESpace& space) {
  const int deg = 2 * polynomial_degree(space.family());
  const auto rule = triangle_rule(std::max(1, std::min(10, deg)));
  const int n = space.n_local();
  return assemble_cells(space.n_dofs(), space.n_dofs(), space.mesh().n_cells(), [&] {
    return [cv = CellValues(space, rule), n](int c, std::vector<Triplet>& out) mutable {
      cv.reinit(c);
      const auto dofs = cv.dofs();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int q = 0; q < cv.n_points(); ++q) s += cv.value(i, q).dot(cv.value(j, q)) * cv.JxW(q);
          out.emplace_back(dofs[i], dofs[j], s);
        }
      }
    };
  });
}

namespace {

Vector solve_spd(const SparseMatrix& m, const Vector& rhs) {
  Eigen::SimplicialLLT<SparseMatrix> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error("mass matrix is not positive definite");
  return llt.solve(rhs);
}

template <class Integrand>
Vector project_impl(const FESpace& space, Integrand integrand) {
  // Data is arbitrary, so the load uses the most accurate rule available.
  const auto rule = triangle_rule(10);
  const int n = space.n_local();
  const Vector rhs = assemble_cells_vector(space.n_dofs(), space.mesh().n_cells(), [&] {
    return [cv = CellValues(space, rule), n, &integrand](int c, std::vector<std::pair<int, double>>& out) mutable {
      cv.reinit(c);
      const auto dofs = cv.dofs();
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int q = 0; q < cv.n_points(); ++q) s += integrand(cv.point(q), cv.value(i, q)) * cv.JxW(q);
        out.emplace_back(dofs[i], s);
      }
    };
  });
  return solve_spd(mass_matrix(space), rhs);
}

}  // namespace

Vector l2_project(const FESpace& space, const ScalarFn& f) {
  if (!is_scalar(space.family())) throw InvalidArgument("l2_project: scalar data needs a scalar family");
  return project_impl(space, [&](const Vec2& x, const Vec2& phi) { return f(x) * phi.x(); });
}

Vector l2_project(const FESpace& space, const VectorFn& f) {
  if (is_scalar(space.family())) throw InvalidArgument("l2_project: vector data needs a vector family");
  return project_impl(space, [&](const Vec2& x, const Vec2& phi) { return f(x).dot(phi); });
}

Vector nodal_interpolate(const FESpace& space, const ScalarFn& f) {
  if (!is_scalar(space.family())) throw InvalidArgument("nodal_interpolate: scalar data needs a scalar Lagrange family");
  Vector out(space.n_dofs());
  for (int s = 0; s < space.n_dofs(); ++s) out[s] = f(space.support_point(s));
  return out;
}

Vector nodal_interpolate(const FESpace& space, const VectorFn& f) {
  if (!is_vector_lagrange(space.family())) throw InvalidArgument("nodal_interpolate: not a vector Lagrange family");
  Vector out(space.n_dofs());
  for (int s = 0; s < space.n_scalar_dofs(); ++s) {
    const Vec2 v = f(space.support_point(s));
    out[2 * s] = v.x();
    out[2 * s + 1] = v.y();
  }
  return out;
}

Vector rt_interpolate(const FESpace& space, const VectorFn& f) {
  if (!is_raviart_thomas(space.family())) throw InvalidArgument("rt_interpolate: not an RT family");
  const Mesh2D& m = space.mesh();
  const bool high = space.family() == ElementFamily::RT1;
  Vector out = Vector::Zero(space.n_dofs());
  const auto er = edge_rule(10);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Vec2 a = m.node(m.edges()[e].v[0]), b = m.node(m.edges()[e].v[1]);
    const Vec2 t = b - a;
    const double len = t.norm();
    const Vec2 n(t.y() / len, -t.x() / len);
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t q = 0; q < er.size(); ++q) {
      const double s = er.points[q].x();
      const double fn = f(a + s * t).dot(n) * er.weights[q] * len;
      m0 += fn;
      m1 += fn * (2.0 * s - 1.0);
    }
    if (high) {
      out[2 * e] = m0;
      out[2 * e + 1] = m1;
    } else {
      out[e] = m0;
    }
  }
  if (high) {
    const auto tr = triangle_rule(10);
    const int ne = m.n_edges();
    for (int c = 0; c < m.n_cells(); ++c) {
      const CellGeometry geo = CellGeometry::of(m, c);
      Vec2 acc = Vec2::Zero();
      for (std::size_t q = 0; q < tr.size(); ++q) {
        acc += (geo.jacobian_inv * f(geo.map(tr.points[q]))) * tr.weights[q] * geo.det;
      }
      out[2 * ne + 2 * c] = acc.x();
      out[2 * ne + 2 * c + 1] = acc.y();
    }
  }
  return out;
}

Vector interpolate(const FESpace& space, const VectorFn& f) {
  return is_raviart_thomas(space.family()) ? rt_interpolate(space, f) : nodal_interpolate(space, f);
}

}  // namespace sbfem
