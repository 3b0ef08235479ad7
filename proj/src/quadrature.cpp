#include "sbfem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sbfem/error.hpp"

namespace sbfem {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    // Map [-1,1] -> [0,1], ascending order.
    x[n - 1 - i] = 0.5 * (1.0 + z);
    w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

namespace {

void check_degree(int degree) {
  if (degree < 1 || degree > 10) {
    throw InvalidArgument("quadrature degree " + std::to_string(degree) + " unsupported (1..10)");
  }
}

}  // namespace

QuadratureRule edge_rule(int degree) {
  check_degree(degree);
  const int n = (degree + 2) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    r.points.emplace_back(x[i], 0.0);
    r.weights.push_back(w[i]);
  }
  return r;
}

QuadratureRule triangle_rule(int degree) {
  check_degree(degree);
  // The Duffy factor (1-u) raises the degree in u by one.
  const int nu = (degree + 3) / 2;
  const int nv = (degree + 2) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);
  QuadratureRule r;
  r.degree = degree;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      r.points.emplace_back(xu[i], xv[j] * (1.0 - xu[i]));
      r.weights.push_back(wu[i] * wv[j] * (1.0 - xu[i]));
    }
  }
  return r;
}

}  // namespace sbfem
