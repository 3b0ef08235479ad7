#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbfem/assembly.hpp"
#include "sbfem/fespace.hpp"
#include "sbfem/interface.hpp"
#include "sbfem/linear_solver.hpp"

namespace sbfem {

/// Unknown blocks in the order of the monolithic vector.
enum Field : int { UF = 0, UP, ETA, PF, PP, LAM, N_FIELDS };

std::string_view to_string(Field f);

/// low:  MINI (P1bubble-P1) / RT0-P0 / P1 displacement / P0 multiplier
/// high: Taylor-Hood (P2-P1) / RT1-P1dc / P2 displacement / P1dc multiplier
enum class ElementSet { low, high };

/// Meshes, spaces and interface data of one coupled problem.
struct Discretization {
  /// `displacement` overrides the displacement family of the set.
  Discretization(std::shared_ptr<const Mesh2D> fluid, std::shared_ptr<const Mesh2D> poro, ElementSet set,
                 std::optional<ElementFamily> displacement = std::nullopt);

  std::shared_ptr<const Mesh2D> fluid_mesh, poro_mesh;
  ElementSet elements;
  FESpace V_f, W_f, V_p, W_p, X_p;
  InterfacePairing pairing;
  MultiplierSpace L;

  /// offsets[f] is the first index of field f; offsets[N_FIELDS] the total.
  std::array<int, N_FIELDS + 1> offsets() const;
};

/// Every discrete form of the problem, before block placement.
struct Operators {
  SparseMatrix A_f, A_p, A_e;
  SparseMatrix B_f, B_p, B_e;  ///< -(div v, w), rows index pressures
  SparseMatrix M_p;            ///< Darcy pressure mass
  BjsBlocks bjs;
  GammaBlocks gamma;
};
Operators assemble_operators(const Discretization& d, const PhysicalParams& params);

/// E dX/dt + H X = L. E has nonzero columns only in the eta and p_p blocks.
struct BlockSystem {
  std::array<int, N_FIELDS + 1> offsets;
  SparseMatrix E, H;

  int size() const { return offsets[N_FIELDS]; }
  SparseMatrix step_matrix(double tau) const;
};
BlockSystem build_system(const Operators& ops, const PhysicalParams& params, const std::array<int, N_FIELDS + 1>& offsets);

using TimeScalarFn = std::function<double(const Vec2&, double)>;
using TimeVectorFn = std::function<Vec2(const Vec2&, double)>;

/// Full essential condition on a velocity or displacement field. For RT
/// fields only the normal flux of `value` is imposed.
struct EssentialBC {
  Field field;
  std::string tag;
  TimeVectorFn value;  ///< empty means homogeneous
};

/// Homogeneous normal-component constraint on a Lagrange vector field.
struct NormalBC {
  Field field;
  std::string tag;
};

/// Sources, boundary data and initial data. Empty functions mean zero.
struct ProblemData {
  TimeVectorFn f_f, f_p;
  TimeVectorFn g_p;  ///< Darcy momentum source (mu K^-1 u + grad p = g)
  TimeScalarFn q_f, q_p;
  std::vector<std::string> pressure_tags;  ///< natural Darcy pressure boundary
  TimeScalarFn p_D;
  std::vector<EssentialBC> essential;
  std::vector<NormalBC> normal;
  ScalarFn p_p0;
  VectorFn eta0;
};

/// L(t) of the DAE.
Vector assemble_rhs(const Discretization& d, const ProblemData& data, double t);

/// Constrained DOFs of a problem: rotations for normal constraints and the
/// DOFs fixed in the rotated frame.
class Constraints {
 public:
  Constraints(const Discretization& d, const ProblemData& data);

  /// X = Q X'. Identity except 2x2 blocks [n t] at rotated nodes.
  const SparseMatrix& Q() const { return Q_; }
  /// Sorted constrained indices in the rotated frame.
  const std::vector<int>& indices() const { return idx_; }
  /// Prescribed rotated-frame values at time t (aligned with indices()).
  Vector values(double t) const;
  bool is_constrained(int i) const { return mask_[i] != 0; }

 private:
  const Discretization* d_;
  const ProblemData* data_;
  SparseMatrix Q_;
  std::vector<int> idx_;
  std::vector<char> mask_;
  // Source of each constrained value: essential bc index, or -1 for zero,
  // and the dof within that bc's field space.
  std::vector<int> source_;
  std::vector<int> local_;
};

/// Factorized system M x = b with the DOFs `indices` (in the frame X = Q X')
/// fixed to given values. M is kept in the original frame.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const SparseMatrix& M, const SparseMatrix& Q, std::vector<int> indices);

  /// Solves with rotated-frame values `g` (aligned with indices); returns X
  /// in the original frame.
  Vector solve(const Vector& rhs, const Vector& g) const;
  /// Residual M X - rhs expressed in the rotated frame.
  Vector rotated_residual(const Vector& X, const Vector& rhs) const;
  const std::vector<int>& indices() const { return idx_; }
  const SparseMatrix& matrix() const { return M_; }

 private:
  SparseMatrix M_;
  SparseMatrix Q_;
  std::vector<int> idx_;
  SparseMatrix Mcol_;  ///< free rows, constrained columns of Q' M Q
  std::unique_ptr<SparseLU> lu_;
};

struct TransientState {
  int n = 0;
  double t = 0.0;
  Vector X;
};

/// Data for per-step diagnostics.
struct StepInfo {
  int n;
  double t;
  double tau;
  const Vector& X_prev;
  const Vector& X;
  const Vector& load;  ///< L(t_n)
  const Vector& rhs;   ///< L(t_n) + E X_prev / tau
  const ConstrainedSolver& solver;
  const Constraints& constraints;
};

struct TransientConfig {
  double T = 0.0;
  double tau = 0.0;
  int output_stride = 0;  ///< 0: final state only
  std::function<void(const StepInfo&)> on_step;
  /// Replaces the initial eta and p_p blocks taken from ProblemData.
  std::optional<Vector> initial;
};

/// Number of steps N with N tau = T; throws InvalidArgument otherwise.
int step_count(double T, double tau);

/// Initial state: L2-projected pressure, interpolated displacement (or the
/// eta and p_p blocks of `given`) and a consistency solve of the remaining
/// fields at t = 0.
Vector initial_state(const Discretization& d, const BlockSystem& sys, const ProblemData& data, const Constraints& c,
                     const std::optional<Vector>& given = std::nullopt);

/// Backward Euler from t = 0 to T.
std::vector<TransientState> run_transient(const Discretization& d, const BlockSystem& sys, const ProblemData& data,
                                          const TransientConfig& cfg);

/// Extracts field f of a monolithic vector.
Vector field(const Vector& X, const std::array<int, N_FIELDS + 1>& offsets, Field f);

}  // namespace sbfem
