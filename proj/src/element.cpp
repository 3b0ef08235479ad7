#include "sbfem/element.hpp"

#include <array>
#include <cmath>

#include "sbfem/error.hpp"
#include "sbfem/quadrature.hpp"

namespace sbfem {

std::string_view to_string(ElementFamily f) {
  switch (f) {
    case ElementFamily::P0: return "P0";
    case ElementFamily::P1: return "P1";
    case ElementFamily::P1dc: return "P1dc";
    case ElementFamily::P2: return "P2";
    case ElementFamily::P1bubble: return "P1bubble";
    case ElementFamily::RT0: return "RT0";
    case ElementFamily::RT1: return "RT1";
    case ElementFamily::VecP1: return "VecP1";
    case ElementFamily::VecP1bubble: return "VecP1bubble";
    case ElementFamily::VecP2: return "VecP2";
  }
  return "?";
}

int local_dof_count(ElementFamily f) {
  switch (f) {
    case ElementFamily::P0: return 1;
    case ElementFamily::P1: return 3;
    case ElementFamily::P1dc: return 3;
    case ElementFamily::P2: return 6;
    case ElementFamily::P1bubble: return 4;
    case ElementFamily::RT0: return 3;
    case ElementFamily::RT1: return 8;
    case ElementFamily::VecP1: return 6;
    case ElementFamily::VecP1bubble: return 8;
    case ElementFamily::VecP2: return 12;
  }
  return 0;
}

bool is_vector_lagrange(ElementFamily f) {
  return f == ElementFamily::VecP1 || f == ElementFamily::VecP1bubble || f == ElementFamily::VecP2;
}

bool is_raviart_thomas(ElementFamily f) { return f == ElementFamily::RT0 || f == ElementFamily::RT1; }

bool is_scalar(ElementFamily f) { return !is_vector_lagrange(f) && !is_raviart_thomas(f); }

ElementFamily scalar_family(ElementFamily f) {
  switch (f) {
    case ElementFamily::VecP1: return ElementFamily::P1;
    case ElementFamily::VecP1bubble: return ElementFamily::P1bubble;
    case ElementFamily::VecP2: return ElementFamily::P2;
    default: return f;
  }
}

int polynomial_degree(ElementFamily f) {
  switch (scalar_family(f)) {
    case ElementFamily::P0: return 0;
    case ElementFamily::P1:
    case ElementFamily::P1dc:
    case ElementFamily::RT0: return 1;
    case ElementFamily::P2:
    case ElementFamily::RT1: return 2;
    case ElementFamily::P1bubble: return 3;
    default: return 0;
  }
}

namespace {

constexpr double kRefTol = 1e-12;

// Scalar Lagrange basis: values and reference gradients.
void scalar_basis(ElementFamily f, const Vec2& p, std::vector<double>& v, std::vector<Vec2>& g) {
  const double x = p.x(), y = p.y();
  const std::array<double, 3> l{1.0 - x - y, x, y};
  const std::array<Vec2, 3> dl{Vec2(-1.0, -1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  switch (f) {
    case ElementFamily::P0:
      v = {1.0};
      g = {Vec2::Zero()};
      return;
    case ElementFamily::P1:
    case ElementFamily::P1dc:
      v = {l[0], l[1], l[2]};
      g = {dl[0], dl[1], dl[2]};
      return;
    case ElementFamily::P2: {
      v.resize(6);
      g.resize(6);
      for (int i = 0; i < 3; ++i) {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
        g[i] = (4.0 * l[i] - 1.0) * dl[i];
      }
      for (int k = 0; k < 3; ++k) {
        const int a = (k + 1) % 3, b = (k + 2) % 3;
        v[3 + k] = 4.0 * l[a] * l[b];
        g[3 + k] = 4.0 * (dl[a] * l[b] + l[a] * dl[b]);
      }
      return;
    }
    case ElementFamily::P1bubble: {
      // Nodal form: vertex functions vanish at the barycentre, bubble = 27 l0 l1 l2.
      const double b = 27.0 * l[0] * l[1] * l[2];
      const Vec2 db = 27.0 * (dl[0] * l[1] * l[2] + l[0] * dl[1] * l[2] + l[0] * l[1] * dl[2]);
      v = {l[0] - b / 3.0, l[1] - b / 3.0, l[2] - b / 3.0, b};
      g = {dl[0] - db / 3.0, dl[1] - db / 3.0, dl[2] - db / 3.0, db};
      return;
    }
    default:
      throw InvalidArgument("scalar_basis: not a scalar Lagrange family");
  }
}

// RT1 monomial basis of P1^2 + x P1~.
constexpr int kRt1Dim = 8;

void rt1_monomials(const Vec2& p, std::array<Vec2, kRt1Dim>& v, std::array<Mat2, kRt1Dim>& g) {
  const double x = p.x(), y = p.y();
  v = {Vec2(1, 0), Vec2(x, 0), Vec2(y, 0), Vec2(0, 1), Vec2(0, x), Vec2(0, y), Vec2(x * x, x * y),
       Vec2(x * y, y * y)};
  Mat2 z = Mat2::Zero();
  for (auto& m : g) m = z;
  g[1](0, 0) = 1.0;
  g[2](0, 1) = 1.0;
  g[4](1, 0) = 1.0;
  g[5](1, 1) = 1.0;
  g[6] << 2.0 * x, 0.0, y, x;
  g[7] << y, x, 0.0, 2.0 * y;
}

const std::array<Vec2, 3> kRefVertex{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};

// Coefficients of the RT1 nodal basis in the monomial basis: phi_i = sum_m C(m,i) mono_m.
const Eigen::Matrix<double, kRt1Dim, kRt1Dim>& rt1_coefficients() {
  static const Eigen::Matrix<double, kRt1Dim, kRt1Dim> coeffs = [] {
    Eigen::Matrix<double, kRt1Dim, kRt1Dim> V = Eigen::Matrix<double, kRt1Dim, kRt1Dim>::Zero();
    std::array<Vec2, kRt1Dim> mv;
    std::array<Mat2, kRt1Dim> mg;
    const auto er = edge_rule(5);
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = kRefVertex[(k + 1) % 3], b = kRefVertex[(k + 2) % 3];
      const Vec2 t = b - a;
      const double len = t.norm();
      const Vec2 n(t.y() / len, -t.x() / len);
      for (std::size_t q = 0; q < er.size(); ++q) {
        const double s = er.points[q].x();
        rt1_monomials(a + s * t, mv, mg);
        for (int m = 0; m < kRt1Dim; ++m) {
          const double flux = mv[m].dot(n) * er.weights[q] * len;
          V(2 * k, m) += flux;
          V(2 * k + 1, m) += flux * (2.0 * s - 1.0);
        }
      }
    }
    const auto tr = triangle_rule(4);
    for (std::size_t q = 0; q < tr.size(); ++q) {
      rt1_monomials(tr.points[q], mv, mg);
      for (int m = 0; m < kRt1Dim; ++m) {
        V(6, m) += mv[m].x() * tr.weights[q];
        V(7, m) += mv[m].y() * tr.weights[q];
      }
    }
    return Eigen::Matrix<double, kRt1Dim, kRt1Dim>(V.inverse());
  }();
  return coeffs;
}

}  // namespace

BasisValues eval_basis(ElementFamily f, const Vec2& p) {
  if (p.x() < -kRefTol || p.y() < -kRefTol || p.x() + p.y() > 1.0 + kRefTol) {
    throw InvalidArgument("eval_basis: point outside the reference triangle");
  }
  BasisValues out;
  const int n = local_dof_count(f);
  out.value.assign(n, Vec2::Zero());
  out.grad.assign(n, Mat2::Zero());
  out.div.assign(n, 0.0);
  if (is_scalar(f)) {
    std::vector<double> v;
    std::vector<Vec2> g;
    scalar_basis(f, p, v, g);
    for (int i = 0; i < n; ++i) {
      out.value[i].x() = v[i];
      out.grad[i].row(0) = g[i].transpose();
    }
  } else if (is_vector_lagrange(f)) {
    std::vector<double> v;
    std::vector<Vec2> g;
    scalar_basis(scalar_family(f), p, v, g);
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (int c = 0; c < 2; ++c) {
        const int d = 2 * static_cast<int>(i) + c;
        out.value[d][c] = v[i];
        out.grad[d].row(c) = g[i].transpose();
        out.div[d] = g[i][c];
      }
    }
  } else if (f == ElementFamily::RT0) {
    for (int k = 0; k < 3; ++k) {
      out.value[k] = p - kRefVertex[k];
      out.grad[k] = Mat2::Identity();
      out.div[k] = 2.0;
    }
  } else {
    std::array<Vec2, kRt1Dim> mv;
    std::array<Mat2, kRt1Dim> mg;
    rt1_monomials(p, mv, mg);
    const auto& C = rt1_coefficients();
    for (int i = 0; i < kRt1Dim; ++i) {
      for (int m = 0; m < kRt1Dim; ++m) {
        out.value[i] += C(m, i) * mv[m];
        out.grad[i] += C(m, i) * mg[m];
      }
      out.div[i] = out.grad[i].trace();
    }
  }
  return out;
}

CellGeometry CellGeometry::of(const Vec2& a, const Vec2& b, const Vec2& c) {
  CellGeometry g;
  g.origin = a;
  g.jacobian.col(0) = b - a;
  g.jacobian.col(1) = c - a;
  g.det = g.jacobian.determinant();
  if (g.det != 0.0) g.jacobian_inv = g.jacobian.inverse();
  else g.jacobian_inv.setZero();
  return g;
}

CellGeometry CellGeometry::of(const Mesh2D& mesh, int cell) {
  const auto& t = mesh.cell(cell).v;
  return of(mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2]));
}

void piola_map(const CellGeometry& geo, BasisValues& values) {
  if (!(geo.det > 0.0)) throw DegenerateGeometry("piola_map: non-positive Jacobian determinant");
  const double inv_det = 1.0 / geo.det;
  for (std::size_t i = 0; i < values.value.size(); ++i) {
    values.value[i] = inv_det * (geo.jacobian * values.value[i]);
    values.grad[i] = inv_det * (geo.jacobian * values.grad[i] * geo.jacobian_inv);
    values.div[i] *= inv_det;
  }
}

void lagrange_map(const CellGeometry& geo, ElementFamily f, BasisValues& values) {
  if (!(geo.det > 0.0)) throw DegenerateGeometry("lagrange_map: non-positive Jacobian determinant");
  for (std::size_t i = 0; i < values.value.size(); ++i) {
    values.grad[i] = values.grad[i] * geo.jacobian_inv;
    if (is_vector_lagrange(f)) values.div[i] = values.grad[i].trace();
  }
}

}  // namespace sbfem
