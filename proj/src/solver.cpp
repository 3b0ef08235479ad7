#include "sbfem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "sbfem/error.hpp"

namespace sbfem {

std::string_view to_string(Field f) {
  switch (f) {
    case UF: return "u_f";
    case UP: return "u_p";
    case ETA: return "eta";
    case PF: return "p_f";
    case PP: return "p_p";
    case LAM: return "lambda";
    default: return "?";
  }
}

namespace {

ElementFamily default_displacement(ElementSet set) {
  return set == ElementSet::low ? ElementFamily::VecP1 : ElementFamily::VecP2;
}

const FESpace& space_of(const Discretization& d, Field f) {
  switch (f) {
    case UF: return d.V_f;
    case UP: return d.V_p;
    case ETA: return d.X_p;
    case PF: return d.W_f;
    case PP: return d.W_p;
    default: throw InvalidArgument("field " + std::string(to_string(f)) + " has no finite element space");
  }
}

using Offsets = std::array<int, N_FIELDS + 1>;

int block_size(const Offsets& o, Field f) { return o[f + 1] - o[f]; }

void place(std::vector<Triplet>& out, const SparseMatrix& m, const Offsets& o, Field row, Field col, double scale,
           bool transpose, const char* name) {
  const Eigen::Index r = transpose ? m.cols() : m.rows();
  const Eigen::Index c = transpose ? m.rows() : m.cols();
  if (r != block_size(o, row) || c != block_size(o, col)) {
    throw InvalidArgument(std::string("block ") + name + ": size " + std::to_string(r) + "x" + std::to_string(c) +
                          " does not match " + std::to_string(block_size(o, row)) + "x" +
                          std::to_string(block_size(o, col)));
  }
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const int i = static_cast<int>(transpose ? it.col() : it.row());
      const int j = static_cast<int>(transpose ? it.row() : it.col());
      out.emplace_back(o[row] + i, o[col] + j, scale * it.value());
    }
  }
}

ScalarFn at_time(const TimeScalarFn& f, double t) {
  if (!f) return [](const Vec2&) { return 0.0; };
  return [f, t](const Vec2& x) { return f(x, t); };
}

VectorFn at_time(const TimeVectorFn& f, double t) {
  if (!f) return [](const Vec2&) { return Vec2(Vec2::Zero()); };
  return [f, t](const Vec2& x) { return f(x, t); };
}

}  // namespace

Discretization::Discretization(std::shared_ptr<const Mesh2D> fluid, std::shared_ptr<const Mesh2D> poro,
                               ElementSet set, std::optional<ElementFamily> displacement)
    : fluid_mesh(fluid),
      poro_mesh(poro),
      elements(set),
      V_f(fluid, set == ElementSet::low ? ElementFamily::VecP1bubble : ElementFamily::VecP2),
      W_f(fluid, ElementFamily::P1),
      V_p(poro, set == ElementSet::low ? ElementFamily::RT0 : ElementFamily::RT1),
      W_p(poro, set == ElementSet::low ? ElementFamily::P0 : ElementFamily::P1dc),
      X_p(poro, displacement.value_or(default_displacement(set))),
      pairing(common_refinement(*fluid, *poro)),
      L(pairing, set == ElementSet::low ? 0 : 1) {
  if (!is_vector_lagrange(X_p.family())) throw InvalidArgument("displacement family must be a vector Lagrange family");
}

Offsets Discretization::offsets() const {
  Offsets o{};
  const int sizes[N_FIELDS] = {V_f.n_dofs(), V_p.n_dofs(), X_p.n_dofs(), W_f.n_dofs(), W_p.n_dofs(), L.n_dofs()};
  for (int f = 0; f < N_FIELDS; ++f) o[f + 1] = o[f] + sizes[f];
  return o;
}

Operators assemble_operators(const Discretization& d, const PhysicalParams& params) {
  params.validate(d.poro_mesh->n_cells());
  Operators ops;
  ops.A_f = assemble_stokes_viscous(d.V_f, params.mu);
  ops.A_p = assemble_darcy_mass(d.V_p, params);
  ops.A_e = assemble_elasticity(d.X_p, params);
  ops.B_f = assemble_div_coupling(d.V_f, d.W_f);
  ops.B_p = assemble_div_coupling(d.V_p, d.W_p);
  ops.B_e = assemble_div_coupling(d.X_p, d.W_p);
  ops.M_p = mass_matrix(d.W_p);
  ops.bjs = assemble_bjs(d.pairing, d.V_f, d.X_p, params);
  ops.gamma = assemble_bgamma(d.pairing, d.V_f, d.V_p, d.X_p, d.L);
  return ops;
}

BlockSystem build_system(const Operators& ops, const PhysicalParams& params, const Offsets& offsets) {
  const int n = offsets[N_FIELDS];
  std::vector<Triplet> e, h;
  place(e, ops.bjs.fe, offsets, UF, ETA, -1.0, false, "E(u_f, eta)");
  place(e, ops.bjs.ee, offsets, ETA, ETA, 1.0, false, "E(eta, eta)");
  place(e, ops.B_e, offsets, PP, ETA, -params.alpha, false, "E(p_p, eta)");
  place(e, ops.M_p, offsets, PP, PP, params.s0, false, "E(p_p, p_p)");
  place(e, ops.gamma.e, offsets, LAM, ETA, -1.0, false, "E(lambda, eta)");

  place(h, ops.A_f, offsets, UF, UF, 1.0, false, "H(u_f, u_f)");
  place(h, ops.bjs.ff, offsets, UF, UF, 1.0, false, "H(u_f, u_f) BJS");
  place(h, ops.B_f, offsets, UF, PF, 1.0, true, "H(u_f, p_f)");
  place(h, ops.gamma.f, offsets, UF, LAM, 1.0, true, "H(u_f, lambda)");
  place(h, ops.A_p, offsets, UP, UP, 1.0, false, "H(u_p, u_p)");
  place(h, ops.B_p, offsets, UP, PP, 1.0, true, "H(u_p, p_p)");
  place(h, ops.gamma.p, offsets, UP, LAM, 1.0, true, "H(u_p, lambda)");
  place(h, ops.bjs.fe, offsets, ETA, UF, -1.0, true, "H(eta, u_f)");
  place(h, ops.A_e, offsets, ETA, ETA, 1.0, false, "H(eta, eta)");
  place(h, ops.B_e, offsets, ETA, PP, params.alpha, true, "H(eta, p_p)");
  place(h, ops.gamma.e, offsets, ETA, LAM, 1.0, true, "H(eta, lambda)");
  place(h, ops.B_f, offsets, PF, UF, -1.0, false, "H(p_f, u_f)");
  place(h, ops.B_p, offsets, PP, UP, -1.0, false, "H(p_p, u_p)");
  place(h, ops.gamma.f, offsets, LAM, UF, -1.0, false, "H(lambda, u_f)");
  place(h, ops.gamma.p, offsets, LAM, UP, -1.0, false, "H(lambda, u_p)");

  BlockSystem sys;
  sys.offsets = offsets;
  sys.E.resize(n, n);
  sys.H.resize(n, n);
  sys.E.setFromTriplets(e.begin(), e.end());
  sys.H.setFromTriplets(h.begin(), h.end());
  sys.E.prune(0.0);
  sys.H.prune(0.0);
  return sys;
}

SparseMatrix BlockSystem::step_matrix(double tau) const {
  if (!(tau > 0.0)) throw InvalidArgument("time step must be positive");
  SparseMatrix m = E / tau + H;
  m.makeCompressed();
  return m;
}

Vector assemble_rhs(const Discretization& d, const ProblemData& data, double t) {
  const Offsets o = d.offsets();
  Vector L = Vector::Zero(o[N_FIELDS]);
  if (data.f_f) L.segment(o[UF], block_size(o, UF)) = assemble_load(d.V_f, at_time(data.f_f, t));
  Vector up = Vector::Zero(block_size(o, UP));
  if (data.g_p) up += assemble_load(d.V_p, at_time(data.g_p, t));
  if (data.p_D && !data.pressure_tags.empty()) up += assemble_pressure_bc(d.V_p, data.pressure_tags, at_time(data.p_D, t));
  L.segment(o[UP], up.size()) = up;
  if (data.f_p) L.segment(o[ETA], block_size(o, ETA)) = assemble_load(d.X_p, at_time(data.f_p, t));
  if (data.q_f) L.segment(o[PF], block_size(o, PF)) = assemble_load(d.W_f, at_time(data.q_f, t));
  if (data.q_p) L.segment(o[PP], block_size(o, PP)) = assemble_load(d.W_p, at_time(data.q_p, t));
  return L;
}

Constraints::Constraints(const Discretization& d, const ProblemData& data) : d_(&d), data_(&data) {
  const Offsets o = d.offsets();
  const int n = o[N_FIELDS];
  mask_.assign(n, 0);
  std::vector<int> source(n, -1), local(n, -1);

  for (std::size_t k = 0; k < data.essential.size(); ++k) {
    const EssentialBC& bc = data.essential[k];
    if (bc.field != UF && bc.field != UP && bc.field != ETA) {
      throw InvalidArgument("essential condition on " + std::string(to_string(bc.field)) + " is not supported");
    }
    const FESpace& V = space_of(d, bc.field);
    const auto dofs = V.boundary_dofs(bc.tag);
    if (dofs.empty()) throw InvalidArgument("essential condition: no boundary edges tagged '" + bc.tag + "'");
    for (int dof : dofs) {
      const int i = o[bc.field] + dof;
      if (mask_[i]) continue;
      mask_[i] = 1;
      source[i] = static_cast<int>(k);
      local[i] = dof;
    }
  }

  std::vector<Triplet> q;
  std::vector<char> rotated(n, 0);
  for (Field f : {UF, ETA}) {
    std::map<int, std::vector<Vec2>> normals;
    for (const NormalBC& bc : data.normal) {
      if (bc.field != f) continue;
      const auto nodes = space_of(d, f).boundary_nodes(bc.tag);
      if (nodes.empty()) throw InvalidArgument("normal condition: no boundary edges tagged '" + bc.tag + "'");
      for (const auto& node : nodes) {
        auto& list = normals[node.scalar_dof];
        list.insert(list.end(), node.normals.begin(), node.normals.end());
      }
    }
    for (const auto& [s, ns] : normals) {
      const int i0 = o[f] + 2 * s, i1 = i0 + 1;
      if (mask_[i0] || mask_[i1]) continue;
      bool corner = false;
      Vec2 sum = Vec2::Zero();
      for (std::size_t a = 0; a < ns.size(); ++a) {
        sum += ns[a];
        for (std::size_t b = a + 1; b < ns.size(); ++b) corner = corner || ns[a].dot(ns[b]) < 0.866;
      }
      if (corner || sum.norm() < 1e-12) {
        mask_[i0] = mask_[i1] = 1;
        continue;
      }
      const Vec2 nn = sum.normalized();
      const Vec2 tt(-nn.y(), nn.x());
      q.emplace_back(i0, i0, nn.x());
      q.emplace_back(i1, i0, nn.y());
      q.emplace_back(i0, i1, tt.x());
      q.emplace_back(i1, i1, tt.y());
      rotated[i0] = rotated[i1] = 1;
      mask_[i0] = 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!rotated[i]) q.emplace_back(i, i, 1.0);
  }
  Q_.resize(n, n);
  Q_.setFromTriplets(q.begin(), q.end());
  Q_.makeCompressed();

  for (int i = 0; i < n; ++i) {
    if (!mask_[i]) continue;
    idx_.push_back(i);
    source_.push_back(source[i]);
    local_.push_back(local[i]);
  }
}

Vector Constraints::values(double t) const {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(idx_.size()));
  std::map<int, Vector> interp;
  for (std::size_t k = 0; k < idx_.size(); ++k) {
    const int src = source_[k];
    if (src < 0) continue;
    const EssentialBC& bc = data_->essential[src];
    if (!bc.value) continue;
    auto it = interp.find(src);
    if (it == interp.end()) it = interp.emplace(src, interpolate(space_of(*d_, bc.field), at_time(bc.value, t))).first;
    g[static_cast<Eigen::Index>(k)] = it->second[local_[k]];
  }
  return g;
}

ConstrainedSolver::ConstrainedSolver(const SparseMatrix& M, const SparseMatrix& Q, std::vector<int> indices)
    : M_(M), Q_(Q), idx_(std::move(indices)) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || Q.rows() != n || Q.cols() != n) throw InvalidArgument("ConstrainedSolver: size mismatch");
  std::sort(idx_.begin(), idx_.end());
  idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
  std::vector<int> col_of(n, -1);
  for (std::size_t k = 0; k < idx_.size(); ++k) {
    if (idx_[k] < 0 || idx_[k] >= n) throw OutOfBounds("constrained index out of range");
    col_of[idx_[k]] = static_cast<int>(k);
  }
  const SparseMatrix Mr = SparseMatrix(Q.transpose()) * M * Q;
  std::vector<Triplet> a, c;
  for (int k = 0; k < Mr.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(Mr, k); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      if (col_of[i] >= 0) continue;
      if (col_of[j] >= 0) {
        c.emplace_back(i, col_of[j], it.value());
      } else {
        a.emplace_back(i, j, it.value());
      }
    }
  }
  for (int i : idx_) a.emplace_back(i, i, 1.0);
  SparseMatrix A(n, n);
  A.setFromTriplets(a.begin(), a.end());
  Mcol_.resize(n, static_cast<Eigen::Index>(idx_.size()));
  Mcol_.setFromTriplets(c.begin(), c.end());
  lu_ = std::make_unique<SparseLU>(A);
}

Vector ConstrainedSolver::solve(const Vector& rhs, const Vector& g) const {
  if (g.size() != static_cast<Eigen::Index>(idx_.size())) throw InvalidArgument("ConstrainedSolver: value count mismatch");
  Vector b = Q_.transpose() * rhs;
  if (!idx_.empty()) b -= Mcol_ * g;
  for (std::size_t k = 0; k < idx_.size(); ++k) b[idx_[k]] = g[static_cast<Eigen::Index>(k)];
  return Q_ * lu_->solve(b);
}

Vector ConstrainedSolver::rotated_residual(const Vector& X, const Vector& rhs) const {
  return Q_.transpose() * (M_ * X - rhs);
}

int step_count(double T, double tau) {
  if (!(T > 0.0) || !(tau > 0.0)) throw InvalidArgument("T and tau must be positive");
  const double r = std::round(T / tau);
  if (r < 1.0 || r > 1e9 || std::abs(r * tau - T) > 1e-12 * std::max(1.0, T)) {
    throw InvalidArgument("T = " + std::to_string(T) + " is not an integer multiple of tau = " + std::to_string(tau));
  }
  return static_cast<int>(r);
}

Vector initial_state(const Discretization& d, const BlockSystem& sys, const ProblemData& data, const Constraints& c,
                     const std::optional<Vector>& given) {
  const Offsets& o = sys.offsets;
  Vector X = Vector::Zero(sys.size());
  if (given) {
    if (given->size() != sys.size()) throw InvalidArgument("initial vector size does not match the block layout");
    for (Field f : {ETA, PP}) X.segment(o[f], block_size(o, f)) = given->segment(o[f], block_size(o, f));
  } else if (data.eta0) X.segment(o[ETA], block_size(o, ETA)) = nodal_interpolate(d.X_p, data.eta0);
  if (!given && data.p_p0) X.segment(o[PP], block_size(o, PP)) = l2_project(d.W_p, data.p_p0);

  // The remaining fields solve H X = L(0) with eta, p_p and the boundary
  // values held fixed.
  Vector Xr = c.Q().transpose() * X;
  const Vector g0 = c.values(0.0);
  for (std::size_t k = 0; k < c.indices().size(); ++k) Xr[c.indices()[k]] = g0[static_cast<Eigen::Index>(k)];
  std::vector<int> fixed = c.indices();
  for (Field f : {ETA, PP}) {
    for (int i = o[f]; i < o[f + 1]; ++i) fixed.push_back(i);
  }
  ConstrainedSolver solver(sys.H, c.Q(), fixed);
  Vector g(static_cast<Eigen::Index>(solver.indices().size()));
  for (std::size_t k = 0; k < solver.indices().size(); ++k) g[static_cast<Eigen::Index>(k)] = Xr[solver.indices()[k]];
  return solver.solve(assemble_rhs(d, data, 0.0), g);
}

std::vector<TransientState> run_transient(const Discretization& d, const BlockSystem& sys, const ProblemData& data,
                                          const TransientConfig& cfg) {
  const int N = step_count(cfg.T, cfg.tau);
  if (cfg.output_stride < 0) throw InvalidArgument("output stride must be non-negative");
  const Constraints c(d, data);
  const ConstrainedSolver solver(sys.step_matrix(cfg.tau), c.Q(), c.indices());

  std::vector<TransientState> out;
  Vector X = initial_state(d, sys, data, c, cfg.initial);
  if (cfg.output_stride > 0) out.push_back({0, 0.0, X});
  for (int n = 1; n <= N; ++n) {
    const double t = n * cfg.tau;
    const Vector load = assemble_rhs(d, data, t);
    const Vector rhs = load + sys.E * X / cfg.tau;
    Vector Xn = solver.solve(rhs, c.values(t));
    if (cfg.on_step) cfg.on_step(StepInfo{n, t, cfg.tau, X, Xn, load, rhs, solver, c});
    X = std::move(Xn);
    if (n == N || (cfg.output_stride > 0 && n % cfg.output_stride == 0)) out.push_back({n, t, X});
  }
  return out;
}

Vector field(const Vector& X, const Offsets& offsets, Field f) {
  if (X.size() != offsets[N_FIELDS]) throw InvalidArgument("vector size does not match the block layout");
  return X.segment(offsets[f], offsets[f + 1] - offsets[f]);
}

}  // namespace sbfem
