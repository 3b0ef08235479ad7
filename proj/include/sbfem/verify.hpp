#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbfem/assembly.hpp"
#include "sbfem/solver.hpp"

namespace sbfem {

using TimeGradFn = std::function<Mat2(const Vec2&, double)>;

/// Exact fields of a time-dependent coupled problem. grad(c, d) = d v_c / d x_d.
struct ManufacturedSolution {
  TimeVectorFn u_f, u_p, eta;
  TimeScalarFn p_f, p_p;
  TimeGradFn grad_u_f, grad_eta;
  TimeScalarFn lambda;  ///< p_p on the interface
};

/// Convergence-test solution on [0,1]x[-1,1] with the interface at y = 0.
ManufacturedSolution example1_solution();

/// Source terms that make a manufactured solution exact.
struct Sources {
  TimeVectorFn f_f, f_p, g_p;
  TimeScalarFn q_f, q_p;
};

/// Closed-form sources of example1_solution() for constant material data.
Sources example1_sources(const PhysicalParams& params);

/// mu = 1, K = I, lambda_p = mu_p = 1, alpha = 1, s0 = 1, alpha_BJS = 1.
PhysicalParams example1_params();

/// Fluid mesh of [0,1]x[0,1] (n_fluid cells per side) and poro mesh of
/// [0,1]x[-1,0] (n_poro per side). Outer sides are tagged "wall".
std::pair<std::shared_ptr<const Mesh2D>, std::shared_ptr<const Mesh2D>> example1_meshes(int n_poro, int n_fluid);

/// Dirichlet u_f and eta on the walls, natural pressure p_D = p_p on the
/// poro walls, exact initial data.
ProblemData example1_problem(const ManufacturedSolution& ms, const Sources& src);

/// The five norms reported in a convergence table.
enum ErrorNorm : int { E_UF_H1 = 0, E_PF_L2, E_UP_L2, E_PP_LINF_L2, E_ETA_LINF_H1, N_ERROR_NORMS };
std::string_view to_string(ErrorNorm n);

struct ErrorValue {
  double value = 0.0;
  bool absolute = false;  ///< exact norm vanished; value is not relative
};

/// Accumulates the discrete-in-time norms over the steps of a run:
/// l2 norms as (sum tau |.|^2)^(1/2), linf norms as max_n |.|.
class ErrorAccumulator {
 public:
  ErrorAccumulator(const Discretization& d, const ManufacturedSolution& ms);

  void add(const Vector& X, double t, double tau);
  std::array<ErrorValue, N_ERROR_NORMS> relative() const;
  std::array<double, N_ERROR_NORMS> absolute() const;

  /// Squared space norms of the error and of the exact fields at time t.
  struct Snapshot {
    std::array<double, N_ERROR_NORMS> error_sq{};
    std::array<double, N_ERROR_NORMS> exact_sq{};
  };
  Snapshot snapshot(const Vector& X, double t) const;

 private:
  const Discretization* d_;
  const ManufacturedSolution* ms_;
  std::array<double, N_ERROR_NORMS> err_{}, ref_{};
};

/// Discrete energy-identity check of one backward Euler step.
class EnergyIdentity {
 public:
  EnergyIdentity(const Operators& ops, const PhysicalParams& params, const std::array<int, N_FIELDS + 1>& offsets);

  /// 1/2 (s0 |p_p|^2 + a_e(eta, eta)).
  double energy(const Vector& X) const;
  /// |LHS - RHS| / (|LHS| + |RHS|), 0 when both sides vanish. Boundary
  /// work of the constrained DOFs is part of the right-hand side.
  double residual(const StepInfo& step) const;

 private:
  const Operators* ops_;
  double s0_;
  std::array<int, N_FIELDS + 1> o_;
};

/// max_i |b_Gamma(u_f, u_p, d_tau eta; mu_i)| / |X|, 0 when X vanishes.
double constraint_residual(const Operators& ops, const StepInfo& step);

struct LevelResult {
  double h = 0.0;  ///< poro mesh size
  int n_dofs = 0;
  std::array<ErrorValue, N_ERROR_NORMS> errors{};
  double max_constraint_residual = 0.0;
  double max_energy_residual = 0.0;
};

struct ErrorReport {
  std::vector<LevelResult> levels;
  /// log2(e_{k-1} / e_k) for k >= 1.
  double rate(std::size_t level, ErrorNorm n) const;
};

/// Example 1 on one grid pair with T = 0.01, tau = 1e-3.
LevelResult run_example1(ElementSet set, int n_poro, int n_fluid, double T = 0.01, double tau = 1e-3);

/// Example 1 on n_poro = 8, 16, ... (levels of them). Non-matching grids use
/// n_fluid = 5/8 n_poro.
ErrorReport convergence_study(ElementSet set, int levels, bool matching);

/// CSV with columns h, e_uf_H1, rate, e_pf_L2, rate, e_up_L2, rate,
/// e_pp_LinfL2, rate, e_eta_LinfH1, rate.
void write_convergence_csv(const ErrorReport& report, std::ostream& out);

/// Darcy data for the multiplier seminorm: a_p^d, b_p, the poro b_Gamma
/// block and the RT dofs with essential no-flow conditions.
struct AuxiliaryDarcy {
  SparseMatrix A_p, B_p, G_p;
  std::vector<int> noflow;
};

/// S with |mu|^2 = mu' S mu, from the mixed Darcy solve with Dirichlet data mu
/// on the interface.
DenseMatrix multiplier_seminorm_matrix(const AuxiliaryDarcy& aux);
double multiplier_seminorm(const Vector& mu, const AuxiliaryDarcy& aux);

/// Spaces of the inf-sup test. Velocity and displacement DOFs on `wall`
/// edges are removed.
struct InfSupSpaces {
  const FESpace& V_f;
  const FESpace& W_f;
  const FESpace& V_p;
  const FESpace& W_p;
  const FESpace& X_p;
  const InterfacePairing& pairing;
  const MultiplierSpace& L;
  double alpha = 1.0;
  std::string wall = "wall";
};

struct InfSupResult {
  double beta = 0.0;
  /// Generalized eigenvalues below 1e-12 times the largest: dimension of
  /// the discrete kernel of the transposed coupling operator.
  int kernel_dim = 0;
  /// Smallest generalized singular value off that kernel.
  double beta_nonzero = 0.0;
};

/// Smallest generalized singular value of the b + b_Gamma block with respect
/// to the V x X_p and W x Lambda_h Gram matrices. Dense; desk-scale only.
InfSupResult inf_sup_estimate(const InfSupSpaces& s, const PhysicalParams& params);

/// inf_sup_estimate on the Example-1 geometry with n cells per side. With
/// `unstable_stokes` the fluid velocity is plain P1 (no bubble).
InfSupResult inf_sup_example1(int n, bool unstable_stokes = false);

/// Energy 1/2 (s0 |p_p|^2 + a_e(eta, eta)) at t_0, ..., t_steps of a run with
/// zero forcing and zero boundary data, started from random eta and p_p
/// coefficients on the Example-1 geometry.
std::vector<double> stability_energies(ElementSet set, int n, int steps, double tau, unsigned seed);

/// Absolute errors of the steady patch-test solution, which lies in every
/// discrete space.
struct PatchResult {
  std::array<double, N_ERROR_NORMS> absolute{};
  double lambda_error = 0.0;
  double max_error() const;
};
PatchResult patch_test(ElementSet set, int n);

}  // namespace sbfem
