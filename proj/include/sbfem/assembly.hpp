#pragma once

#include <string>
#include <vector>

#include "sbfem/fespace.hpp"
#include "sbfem/interface.hpp"
#include "sbfem/sparse.hpp"

namespace sbfem {

/// Material data. Per-cell fields (indexed by poro cell) may instead hold a
/// single entry that applies everywhere.
struct PhysicalParams {
  double mu = 1.0;
  std::vector<Mat2> K{Mat2::Identity()};
  std::vector<double> lambda_p{1.0};
  std::vector<double> mu_p{1.0};
  double alpha = 1.0;
  double s0 = 1.0;
  double alpha_bjs = 1.0;

  const Mat2& K_at(int cell) const { return K.size() == 1 ? K[0] : K[cell]; }
  double lambda_at(int cell) const { return lambda_p.size() == 1 ? lambda_p[0] : lambda_p[cell]; }
  double mu_p_at(int cell) const { return mu_p.size() == 1 ? mu_p[0] : mu_p[cell]; }

  /// Throws InvalidArgument on the first violated invariant, naming the
  /// field and cell.
  void validate(int n_poro_cells) const;
};

/// a_f(u, v) = (2 mu D(u), D(v)).
SparseMatrix assemble_stokes_viscous(const FESpace& V_f, double mu);

/// a_p^d(u, v) = (mu K^-1 u, v).
SparseMatrix assemble_darcy_mass(const FESpace& V_p, const PhysicalParams& params);

/// a_p^e(eta, xi) = (2 mu_p D(eta), D(xi)) + (lambda_p div eta, div xi).
SparseMatrix assemble_elasticity(const FESpace& X_p, const PhysicalParams& params);

/// Entry (i, j) = -(div phi_j, w_i); rows index W, columns index V.
SparseMatrix assemble_div_coupling(const FESpace& V, const FESpace& W);

/// Interface tangential coupling with weight mu alpha_BJS / sqrt(K_j):
/// ff(i,j) = <g phi_j.t, phi_i.t> over fluid functions, ee likewise over
/// structure functions, fe(i,j) = <g xi_j.t, v_i.t> with fluid rows. The
/// seminorm |v - xi|^2 is v'ff v - 2 v'fe xi + xi'ee xi.
struct BjsBlocks {
  SparseMatrix ff, fe, ee;
};
BjsBlocks assemble_bjs(const InterfacePairing& pairing, const FESpace& V_f, const FESpace& X_p,
                       const PhysicalParams& params);

/// b_Gamma blocks; rows index the multiplier space.
/// f(i,j) = <phi_j.n_f, mu_i>, p(i,j) = <v_j.n_p, mu_i>, e(i,j) = <xi_j.n_p, mu_i>.
struct GammaBlocks {
  SparseMatrix f, p, e;
};
GammaBlocks assemble_bgamma(const InterfacePairing& pairing, const FESpace& V_f, const FESpace& V_p,
                            const FESpace& X_p, const MultiplierSpace& L);

/// Multiplier mass matrix <mu_j, mu_i> on the poro trace.
SparseMatrix assemble_multiplier_mass(const InterfacePairing& pairing, const MultiplierSpace& L);

/// (f, v) for a vector family and (q, w) for a scalar family.
Vector assemble_load(const FESpace& V, const VectorFn& f);
Vector assemble_load(const FESpace& W, const ScalarFn& q);

/// -<p_D, v.n> over boundary edges carrying any of `tags` (RT families).
Vector assemble_pressure_bc(const FESpace& V_p, const std::vector<std::string>& tags, const ScalarFn& p_D);

}  // namespace sbfem
