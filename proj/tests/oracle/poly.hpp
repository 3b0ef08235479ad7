#pragma once

// Exact polynomial arithmetic and integration used as an assembly oracle.
// Shares no code with the library's basis functions or quadrature.

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec2 = Eigen::Vector2d;

/// Bivariate polynomial sum c_ab x^a y^b.
class Poly {
 public:
  Poly() = default;
  Poly(double c) { if (c != 0.0) terms_[{0, 0}] = c; }
  static Poly x() { Poly p; p.terms_[{1, 0}] = 1.0; return p; }
  static Poly y() { Poly p; p.terms_[{0, 1}] = 1.0; return p; }
  static Poly monomial(int a, int b, double c = 1.0) { Poly p; p.terms_[{a, b}] = c; return p; }

  const std::map<std::pair<int, int>, double>& terms() const { return terms_; }

  Poly& operator+=(const Poly& o) {
    for (const auto& [k, c] : o.terms_) terms_[k] += c;
    return *this;
  }
  Poly& operator*=(double s) {
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a += b * -1.0; }
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) r.terms_[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
    return r;
  }

  Poly dx() const {
    Poly r;
    for (const auto& [k, c] : terms_)
      if (k.first > 0) r.terms_[{k.first - 1, k.second}] += c * k.first;
    return r;
  }
  Poly dy() const {
    Poly r;
    for (const auto& [k, c] : terms_)
      if (k.second > 0) r.terms_[{k.first, k.second - 1}] += c * k.second;
    return r;
  }

  double operator()(const Vec2& p) const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) s += c * std::pow(p.x(), k.first) * std::pow(p.y(), k.second);
    return s;
  }

  /// p(X(x, y), Y(x, y)).
  Poly compose(const Poly& X, const Poly& Y) const {
    Poly r;
    for (const auto& [k, c] : terms_) {
      Poly m(c);
      for (int i = 0; i < k.first; ++i) m = m * X;
      for (int i = 0; i < k.second; ++i) m = m * Y;
      r += m;
    }
    return r;
  }

 private:
  std::map<std::pair<int, int>, double> terms_;
};

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Integral over the triangle (a, b, c): pull back to the unit triangle,
/// where int x^i y^j = i! j! / (i + j + 2)!.
inline double integrate(const Poly& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const Poly X = Poly(a.x()) + (b.x() - a.x()) * Poly::x() + (c.x() - a.x()) * Poly::y();
  const Poly Y = Poly(a.y()) + (b.y() - a.y()) * Poly::x() + (c.y() - a.y()) * Poly::y();
  const double jac = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  const Poly q = p.compose(X, Y);
  double s = 0.0;
  for (const auto& [k, coef] : q.terms())
    s += coef * factorial(k.first) * factorial(k.second) / factorial(k.first + k.second + 2);
  return s * jac;
}

/// Line integral over the segment a -> b.
inline double integrate_segment(const Poly& p, const Vec2& a, const Vec2& b) {
  const Poly X = Poly(a.x()) + (b.x() - a.x()) * Poly::x();
  const Poly Y = Poly(a.y()) + (b.y() - a.y()) * Poly::x();
  const Poly q = p.compose(X, Y);
  double s = 0.0;
  for (const auto& [k, coef] : q.terms()) s += coef / (k.first + 1);
  return s * (b - a).norm();
}

/// Polynomials of span{monomials} taking value delta_ij at nodes[i].
inline std::vector<Poly> nodal_basis(const std::vector<Poly>& span, const std::vector<Vec2>& nodes) {
  const int n = static_cast<int>(span.size());
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) V(i, j) = span[j](nodes[i]);
  const Eigen::MatrixXd C = V.inverse();
  std::vector<Poly> basis(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) basis[i] += span[j] * C(j, i);
  return basis;
}

/// Monomials of total degree <= k.
inline std::vector<Poly> monomials(int k) {
  std::vector<Poly> m;
  for (int d = 0; d <= k; ++d)
    for (int a = d; a >= 0; --a) m.push_back(Poly::monomial(a, d - a));
  return m;
}

/// Vector polynomial field.
struct VPoly {
  Poly c[2];
};

inline Poly div(const VPoly& v) { return v.c[0].dx() + v.c[1].dy(); }

}  // namespace oracle
