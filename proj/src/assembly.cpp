#include "sbfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sbfem/error.hpp"
#include "sbfem/quadrature.hpp"

namespace sbfem {

void PhysicalParams::validate(int n_poro_cells) const {
  auto size_ok = [n_poro_cells](std::size_t s) { return s == 1 || static_cast<int>(s) == n_poro_cells; };
  if (!(mu > 0.0)) throw InvalidArgument("viscosity mu must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("Biot-Willis constant alpha must lie in [0,1]");
  if (!(s0 >= 0.0)) throw InvalidArgument("storativity s0 must be non-negative");
  if (!(alpha_bjs >= 0.0)) throw InvalidArgument("alpha_BJS must be non-negative");
  if (!size_ok(K.size()) || !size_ok(lambda_p.size()) || !size_ok(mu_p.size())) {
    throw InvalidArgument("per-cell parameter arrays must have one entry or one per poro cell");
  }
  for (std::size_t c = 0; c < K.size(); ++c) {
    const Mat2& k = K[c];
    const bool sym = std::abs(k(0, 1) - k(1, 0)) <= 1e-14 * k.norm();
    const Eigen::SelfAdjointEigenSolver<Mat2> es(k);
    if (!sym || !(es.eigenvalues().minCoeff() > 0.0)) {
      throw InvalidArgument("permeability is not symmetric positive definite on cell " + std::to_string(c));
    }
  }
  for (std::size_t c = 0; c < lambda_p.size(); ++c) {
    if (!(lambda_p[c] >= 0.0)) throw InvalidArgument("Lame lambda_p must be non-negative on cell " + std::to_string(c));
  }
  for (std::size_t c = 0; c < mu_p.size(); ++c) {
    if (!(mu_p[c] > 0.0)) throw InvalidArgument("Lame mu_p must be positive on cell " + std::to_string(c));
  }
}

namespace {

QuadratureRule volume_rule(const FESpace& a, const FESpace& b) {
  return triangle_rule(std::min(10, polynomial_degree(a.family()) + polynomial_degree(b.family()) + 1));
}

void require_same_mesh(const FESpace& a, const FESpace& b, const char* what) {
  if (&a.mesh() != &b.mesh()) throw InvalidArgument(std::string(what) + ": spaces live on different meshes");
}

template <class Kernel>
SparseMatrix assemble_square(const FESpace& V, const QuadratureRule& rule, Kernel kernel) {
  const int n = V.n_local();
  return assemble_cells(V.n_dofs(), V.n_dofs(), V.mesh().n_cells(), [&] {
    return [cv = CellValues(V, rule), n, &kernel](int c, std::vector<Triplet>& out) mutable {
      cv.reinit(c);
      const auto dofs = cv.dofs();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int q = 0; q < cv.n_points(); ++q) s += kernel(cv, c, i, j, q) * cv.JxW(q);
          out.emplace_back(dofs[i], dofs[j], s);
        }
      }
    };
  });
}

double ddot(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

}  // namespace

SparseMatrix assemble_stokes_viscous(const FESpace& V_f, double mu) {
  if (!is_vector_lagrange(V_f.family())) throw InvalidArgument("assemble_stokes_viscous: needs a vector Lagrange space");
  return assemble_square(V_f, volume_rule(V_f, V_f), [mu](const CellValues& cv, int, int i, int j, int q) {
    return 2.0 * mu * ddot(cv.sym_grad(j, q), cv.sym_grad(i, q));
  });
}

SparseMatrix assemble_darcy_mass(const FESpace& V_p, const PhysicalParams& params) {
  if (!is_raviart_thomas(V_p.family())) throw InvalidArgument("assemble_darcy_mass: needs an RT space");
  const int nc = V_p.mesh().n_cells();
  std::vector<Mat2> kinv(params.K.size());
  for (std::size_t c = 0; c < params.K.size(); ++c) {
    const double det = params.K[c].determinant();
    if (!(det > 0.0) || !(params.K[c].trace() > 0.0)) {
      throw InvalidArgument("assemble_darcy_mass: singular permeability on cell " + std::to_string(c));
    }
    kinv[c] = params.mu * params.K[c].inverse();
  }
  if (kinv.size() != 1 && static_cast<int>(kinv.size()) != nc) throw InvalidArgument("assemble_darcy_mass: K size mismatch");
  return assemble_square(V_p, volume_rule(V_p, V_p), [&kinv](const CellValues& cv, int c, int i, int j, int q) {
    const Mat2& k = kinv.size() == 1 ? kinv[0] : kinv[c];
    return (k * cv.value(j, q)).dot(cv.value(i, q));
  });
}

SparseMatrix assemble_elasticity(const FESpace& X_p, const PhysicalParams& params) {
  if (!is_vector_lagrange(X_p.family())) throw InvalidArgument("assemble_elasticity: needs a vector Lagrange space");
  for (double l : params.lambda_p) {
    if (!(l >= 0.0)) throw InvalidArgument("assemble_elasticity: negative Lame coefficient");
  }
  for (double m : params.mu_p) {
    if (!(m > 0.0)) throw InvalidArgument("assemble_elasticity: non-positive Lame coefficient");
  }
  return assemble_square(X_p, volume_rule(X_p, X_p), [&params](const CellValues& cv, int c, int i, int j, int q) {
    return 2.0 * params.mu_p_at(c) * ddot(cv.sym_grad(j, q), cv.sym_grad(i, q)) +
           params.lambda_at(c) * cv.div(j, q) * cv.div(i, q);
  });
}

SparseMatrix assemble_div_coupling(const FESpace& V, const FESpace& W) {
  require_same_mesh(V, W, "assemble_div_coupling");
  if (is_scalar(V.family()) || !is_scalar(W.family())) {
    throw InvalidArgument("assemble_div_coupling: needs a vector space and a scalar space");
  }
  const auto rule = volume_rule(V, W);
  const int nv = V.n_local(), nw = W.n_local();
  return assemble_cells(W.n_dofs(), V.n_dofs(), V.mesh().n_cells(), [&] {
    return [cv = CellValues(V, rule), cw = CellValues(W, rule), nv, nw](int c, std::vector<Triplet>& out) mutable {
      cv.reinit(c);
      cw.reinit(c);
      const auto dv = cv.dofs();
      const auto dw = cw.dofs();
      for (int i = 0; i < nw; ++i) {
        for (int j = 0; j < nv; ++j) {
          double s = 0.0;
          for (int q = 0; q < cv.n_points(); ++q) s -= cv.div(j, q) * cw.shape(i, q) * cv.JxW(q);
          out.emplace_back(dw[i], dv[j], s);
        }
      }
    };
  });
}

namespace {

int interface_degree(const FESpace& a, const FESpace& b) {
  return std::min(10, polynomial_degree(a.family()) + polynomial_degree(b.family()) + 1);
}

}  // namespace

BjsBlocks assemble_bjs(const InterfacePairing& pairing, const FESpace& V_f, const FESpace& X_p,
                       const PhysicalParams& params) {
  if (params.alpha_bjs > 0.0 && pairing.segments.empty()) throw InvalidArgument("assemble_bjs: empty interface pairing");
  const auto quad = segment_quadrature(pairing, V_f.mesh(), X_p.mesh(),
                                       std::max(interface_degree(V_f, V_f), interface_degree(X_p, X_p)));
  std::vector<Triplet> ff, fe, ee;
  const int nf = V_f.n_local(), ne = X_p.n_local();
  for (std::size_t s = 0; s < pairing.segments.size(); ++s) {
    const auto& seg = pairing.segments[s];
    const int cf = pairing.fluid_edges[seg.fluid_edge].cell;
    const int cp = pairing.poro_edges[seg.poro_edge].cell;
    const Vec2& t = seg.tangent;
    const double kj = t.dot(params.K_at(cp) * t);
    const double gamma = params.mu * params.alpha_bjs / std::sqrt(kj);
    if (gamma == 0.0) continue;
    const auto df = V_f.cell_dofs(cf);
    const auto de = X_p.cell_dofs(cp);
    for (const auto& pt : quad[s]) {
      const BasisValues bf = V_f.cell_basis(cf, pt.ref_f);
      const BasisValues be = X_p.cell_basis(cp, pt.ref_p);
      const double w = gamma * pt.weight;
      for (int i = 0; i < nf; ++i) {
        const double ti = bf.value[i].dot(t);
        for (int j = 0; j < nf; ++j) ff.emplace_back(df[i], df[j], w * ti * bf.value[j].dot(t));
        for (int j = 0; j < ne; ++j) fe.emplace_back(df[i], de[j], w * ti * be.value[j].dot(t));
      }
      for (int i = 0; i < ne; ++i) {
        const double ti = be.value[i].dot(t);
        for (int j = 0; j < ne; ++j) ee.emplace_back(de[i], de[j], w * ti * be.value[j].dot(t));
      }
    }
  }
  BjsBlocks out{SparseMatrix(V_f.n_dofs(), V_f.n_dofs()), SparseMatrix(V_f.n_dofs(), X_p.n_dofs()),
                SparseMatrix(X_p.n_dofs(), X_p.n_dofs())};
  out.ff.setFromTriplets(ff.begin(), ff.end());
  out.fe.setFromTriplets(fe.begin(), fe.end());
  out.ee.setFromTriplets(ee.begin(), ee.end());
  return out;
}

GammaBlocks assemble_bgamma(const InterfacePairing& pairing, const FESpace& V_f, const FESpace& V_p,
                            const FESpace& X_p, const MultiplierSpace& L) {
  if (static_cast<std::size_t>(L.n_dofs()) != pairing.poro_edges.size() * L.n_local()) {
    throw InvalidArgument("assemble_bgamma: multiplier space is not built on this poro trace");
  }
  if (&V_p.mesh() != &X_p.mesh()) throw InvalidArgument("assemble_bgamma: V_p and X_p live on different meshes");
  const int deg = std::min(10, std::max({polynomial_degree(V_f.family()), polynomial_degree(V_p.family()),
                                         polynomial_degree(X_p.family())}) + L.order() + 1);
  const auto quad = segment_quadrature(pairing, V_f.mesh(), V_p.mesh(), deg);
  std::vector<Triplet> tf, tp, te;
  for (std::size_t s = 0; s < pairing.segments.size(); ++s) {
    const auto& seg = pairing.segments[s];
    const int cf = pairing.fluid_edges[seg.fluid_edge].cell;
    const int cp = pairing.poro_edges[seg.poro_edge].cell;
    const auto df = V_f.cell_dofs(cf);
    const auto dp = V_p.cell_dofs(cp);
    const auto de = X_p.cell_dofs(cp);
    for (const auto& pt : quad[s]) {
      const BasisValues bf = V_f.cell_basis(cf, pt.ref_f);
      const BasisValues bp = V_p.cell_basis(cp, pt.ref_p);
      const BasisValues be = X_p.cell_basis(cp, pt.ref_p);
      for (int k = 0; k < L.n_local(); ++k) {
        const int row = L.dof(seg.poro_edge, k);
        const double w = MultiplierSpace::value(k, pt.s_p) * pt.weight;
        for (int j = 0; j < V_f.n_local(); ++j) tf.emplace_back(row, df[j], w * bf.value[j].dot(seg.n_f));
        for (int j = 0; j < V_p.n_local(); ++j) tp.emplace_back(row, dp[j], w * bp.value[j].dot(seg.n_p));
        for (int j = 0; j < X_p.n_local(); ++j) te.emplace_back(row, de[j], w * be.value[j].dot(seg.n_p));
      }
    }
  }
  GammaBlocks out{SparseMatrix(L.n_dofs(), V_f.n_dofs()), SparseMatrix(L.n_dofs(), V_p.n_dofs()),
                  SparseMatrix(L.n_dofs(), X_p.n_dofs())};
  out.f.setFromTriplets(tf.begin(), tf.end());
  out.p.setFromTriplets(tp.begin(), tp.end());
  out.e.setFromTriplets(te.begin(), te.end());
  // Drop exact zeros produced by basis functions with vanishing normal trace.
  out.f.prune(0.0);
  out.p.prune(0.0);
  out.e.prune(0.0);
  return out;
}

SparseMatrix assemble_multiplier_mass(const InterfacePairing& pairing, const MultiplierSpace& L) {
  std::vector<Triplet> t;
  const auto r = edge_rule(2 * L.order() + 1);
  for (std::size_t e = 0; e < pairing.poro_edges.size(); ++e) {
    const double len = (pairing.poro_edges[e].b - pairing.poro_edges[e].a).norm();
    for (int i = 0; i < L.n_local(); ++i) {
      for (int j = 0; j < L.n_local(); ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q) {
          s += MultiplierSpace::value(i, r.points[q].x()) * MultiplierSpace::value(j, r.points[q].x()) * r.weights[q];
        }
        t.emplace_back(L.dof(static_cast<int>(e), i), L.dof(static_cast<int>(e), j), s * len);
      }
    }
  }
  SparseMatrix m(L.n_dofs(), L.n_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

namespace {

template <class Integrand>
Vector assemble_rhs(const FESpace& V, Integrand integrand) {
  const auto rule = triangle_rule(default_quadrature_degree(polynomial_degree(V.family())));
  const int n = V.n_local();
  return assemble_cells_vector(V.n_dofs(), V.mesh().n_cells(), [&] {
    return [cv = CellValues(V, rule), n, &integrand](int c, std::vector<std::pair<int, double>>& out) mutable {
      cv.reinit(c);
      const auto dofs = cv.dofs();
      std::vector<double> local(n, 0.0);
      for (int q = 0; q < cv.n_points(); ++q) {
        for (int i = 0; i < n; ++i) local[i] += integrand(cv.point(q), cv.value(i, q)) * cv.JxW(q);
      }
      for (int i = 0; i < n; ++i) out.emplace_back(dofs[i], local[i]);
    };
  });
}

}  // namespace

Vector assemble_load(const FESpace& V, const VectorFn& f) {
  if (is_scalar(V.family())) throw InvalidArgument("assemble_load: vector data needs a vector family");
  return assemble_rhs(V, [&f](const Vec2& x, const Vec2& phi) { return f(x).dot(phi); });
}

Vector assemble_load(const FESpace& W, const ScalarFn& q) {
  if (!is_scalar(W.family())) throw InvalidArgument("assemble_load: scalar data needs a scalar family");
  return assemble_rhs(W, [&q](const Vec2& x, const Vec2& phi) { return q(x) * phi.x(); });
}

Vector assemble_pressure_bc(const FESpace& V_p, const std::vector<std::string>& tags, const ScalarFn& p_D) {
  if (!is_raviart_thomas(V_p.family())) throw InvalidArgument("assemble_pressure_bc: needs an RT space");
  const Mesh2D& m = V_p.mesh();
  Vector out = Vector::Zero(V_p.n_dofs());
  const auto r = edge_rule(default_quadrature_degree(polynomial_degree(V_p.family())));
  for (const auto& tag : tags) {
    for (int b : m.boundary_edges_with_tag(tag)) {
      const int e = m.boundary_edge_index(b);
      const int c = m.edges()[e].cells[0];
      const Vec2 n = edge_outward_normal(m, e);
      const Vec2 a = m.node(m.edges()[e].v[0]), bpt = m.node(m.edges()[e].v[1]);
      const double len = (bpt - a).norm();
      const CellGeometry geo = CellGeometry::of(m, c);
      const auto dofs = V_p.cell_dofs(c);
      for (std::size_t q = 0; q < r.size(); ++q) {
        const Vec2 x = a + r.points[q].x() * (bpt - a);
        Vec2 ref = geo.inverse_map(x).cwiseMax(0.0);
        if (ref.sum() > 1.0) ref /= ref.sum();
        const BasisValues bv = V_p.cell_basis(c, ref);
        const double w = p_D(x) * r.weights[q] * len;
        for (int i = 0; i < V_p.n_local(); ++i) out[dofs[i]] -= w * bv.value[i].dot(n);
      }
    }
  }
  return out;
}

}  // namespace sbfem
