#include "sbfem/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "sbfem/error.hpp"

namespace sbfem {

namespace {

constexpr double pi = std::numbers::pi;

Mat2 mat(double a, double b, double c, double d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

}  // namespace

ManufacturedSolution example1_solution() {
  ManufacturedSolution ms;
  ms.u_f = [](const Vec2& x, double t) {
    return Vec2(pi * std::cos(pi * t) * Vec2(-3.0 * x.x() + std::cos(x.y()), x.y() + 1.0));
  };
  ms.grad_u_f = [](const Vec2& x, double t) { return Mat2(pi * std::cos(pi * t) * mat(-3.0, -std::sin(x.y()), 0.0, 1.0)); };
  ms.p_f = [](const Vec2& x, double t) {
    return std::exp(t) * std::sin(pi * x.x()) * std::cos(pi * x.y() / 2) + 2 * pi * std::cos(pi * t);
  };
  ms.u_p = [](const Vec2& x, double t) {
    return Vec2(pi * std::exp(t) *
                Vec2(std::cos(pi * x.x()) * std::cos(pi * x.y() / 2), 0.5 * std::sin(pi * x.x()) * std::sin(pi * x.y() / 2)));
  };
  ms.p_p = [](const Vec2& x, double t) { return std::exp(t) * std::sin(pi * x.x()) * std::cos(pi * x.y() / 2); };
  ms.eta = [](const Vec2& x, double t) { return Vec2(std::sin(pi * t) * Vec2(-3.0 * x.x() + std::cos(x.y()), x.y() + 1.0)); };
  ms.grad_eta = [](const Vec2& x, double t) { return Mat2(std::sin(pi * t) * mat(-3.0, -std::sin(x.y()), 0.0, 1.0)); };
  ms.lambda = ms.p_p;
  return ms;
}

Sources example1_sources(const PhysicalParams& params) {
  const double mu = params.mu, mu_p = params.mu_p_at(0), alpha = params.alpha, s0 = params.s0;
  const Mat2 Kinv = params.K_at(0).inverse();
  // grad p_p; p_f differs from p_p by a function of t only.
  auto grad_p = [](const Vec2& x, double t) {
    return Vec2(std::exp(t) * Vec2(pi * std::cos(pi * x.x()) * std::cos(pi * x.y() / 2),
                                   -0.5 * pi * std::sin(pi * x.x()) * std::sin(pi * x.y() / 2)));
  };
  const auto ms = example1_solution();
  Sources s;
  // u_f and eta have constant divergence and Laplacian (-cos y, 0) times
  // their time factor.
  s.f_f = [=](const Vec2& x, double t) {
    return Vec2(grad_p(x, t) + Vec2(mu * pi * std::cos(pi * t) * std::cos(x.y()), 0.0));
  };
  s.q_f = [](const Vec2&, double t) { return -2 * pi * std::cos(pi * t); };
  s.f_p = [=](const Vec2& x, double t) {
    return Vec2(alpha * grad_p(x, t) + Vec2(mu_p * std::sin(pi * t) * std::cos(x.y()), 0.0));
  };
  s.q_p = [=](const Vec2& x, double t) {
    const double div_up = -0.75 * pi * pi * std::exp(t) * std::sin(pi * x.x()) * std::cos(pi * x.y() / 2);
    return s0 * ms.p_p(x, t) - 2 * alpha * pi * std::cos(pi * t) + div_up;
  };
  s.g_p = [=](const Vec2& x, double t) { return Vec2(mu * Kinv * ms.u_p(x, t) + grad_p(x, t)); };
  return s;
}

PhysicalParams example1_params() { return PhysicalParams{}; }

std::pair<std::shared_ptr<const Mesh2D>, std::shared_ptr<const Mesh2D>> example1_meshes(int n_poro, int n_fluid) {
  auto fluid = std::make_shared<const Mesh2D>(build_structured(Rect{0.0, 1.0, 0.0, 1.0}, n_fluid, n_fluid, Subdomain::fluid,
                                                               SideTags{tags::wall, tags::wall, tags::interface, tags::wall}));
  auto poro = std::make_shared<const Mesh2D>(build_structured(Rect{0.0, 1.0, -1.0, 0.0}, n_poro, n_poro, Subdomain::poro,
                                                              SideTags{tags::wall, tags::wall, tags::wall, tags::interface}));
  return {fluid, poro};
}

ProblemData example1_problem(const ManufacturedSolution& ms, const Sources& src) {
  ProblemData data;
  data.f_f = src.f_f;
  data.f_p = src.f_p;
  data.g_p = src.g_p;
  data.q_f = src.q_f;
  data.q_p = src.q_p;
  data.pressure_tags = {tags::wall};
  data.p_D = ms.p_p;
  data.essential = {{UF, tags::wall, ms.u_f}, {ETA, tags::wall, ms.eta}};
  auto p0 = ms.p_p;
  auto eta0 = ms.eta;
  data.p_p0 = [p0](const Vec2& x) { return p0(x, 0.0); };
  data.eta0 = [eta0](const Vec2& x) { return eta0(x, 0.0); };
  return data;
}

std::string_view to_string(ErrorNorm n) {
  switch (n) {
    case E_UF_H1: return "e_uf_H1";
    case E_PF_L2: return "e_pf_L2";
    case E_UP_L2: return "e_up_L2";
    case E_PP_LINF_L2: return "e_pp_LinfL2";
    case E_ETA_LINF_H1: return "e_eta_LinfH1";
    default: return "?";
  }
}

namespace {

// Squared error and exact norms of one field: L2 part plus (if with_grad)
// the H1 seminorm.
template <class ValueFn, class GradFn>
std::pair<double, double> field_norms(const FESpace& V, const Vector& coeffs, ValueFn exact, GradFn exact_grad,
                                      bool with_grad, bool scalar) {
  CellValues cv(V, triangle_rule(10));
  double err = 0.0, ref = 0.0;
  for (int c = 0; c < V.mesh().n_cells(); ++c) {
    cv.reinit(c);
    const auto dofs = cv.dofs();
    for (int q = 0; q < cv.n_points(); ++q) {
      Vec2 uh = Vec2::Zero();
      Mat2 gh = Mat2::Zero();
      for (int i = 0; i < cv.n_local(); ++i) {
        uh += coeffs[dofs[i]] * cv.value(i, q);
        if (with_grad) gh += coeffs[dofs[i]] * cv.grad(i, q);
      }
      const Vec2 u = exact(cv.point(q));
      const double w = cv.JxW(q);
      if (scalar) {
        err += w * (u.x() - uh.x()) * (u.x() - uh.x());
        ref += w * u.x() * u.x();
      } else {
        err += w * (u - uh).squaredNorm();
        ref += w * u.squaredNorm();
      }
      if (with_grad) {
        const Mat2 g = exact_grad(cv.point(q));
        err += w * (g - gh).squaredNorm();
        ref += w * g.squaredNorm();
      }
    }
  }
  return {err, ref};
}

}  // namespace

ErrorAccumulator::ErrorAccumulator(const Discretization& d, const ManufacturedSolution& ms) : d_(&d), ms_(&ms) {}

ErrorAccumulator::Snapshot ErrorAccumulator::snapshot(const Vector& X, double t) const {
  const auto o = d_->offsets();
  const ManufacturedSolution& ms = *ms_;
  Snapshot s;
  auto none = [](const Vec2&) { return Mat2(Mat2::Zero()); };
  auto put = [&](ErrorNorm n, std::pair<double, double> r) {
    s.error_sq[n] = r.first;
    s.exact_sq[n] = r.second;
  };
  put(E_UF_H1, field_norms(
                   d_->V_f, field(X, o, UF), [&](const Vec2& x) { return ms.u_f(x, t); },
                   [&](const Vec2& x) { return ms.grad_u_f(x, t); }, true, false));
  put(E_PF_L2, field_norms(
                   d_->W_f, field(X, o, PF), [&](const Vec2& x) { return Vec2(ms.p_f(x, t), 0.0); }, none, false, true));
  put(E_UP_L2, field_norms(
                   d_->V_p, field(X, o, UP), [&](const Vec2& x) { return ms.u_p(x, t); }, none, false, false));
  put(E_PP_LINF_L2, field_norms(
                        d_->W_p, field(X, o, PP), [&](const Vec2& x) { return Vec2(ms.p_p(x, t), 0.0); }, none, false,
                        true));
  put(E_ETA_LINF_H1, field_norms(
                         d_->X_p, field(X, o, ETA), [&](const Vec2& x) { return ms.eta(x, t); },
                         [&](const Vec2& x) { return ms.grad_eta(x, t); }, true, false));
  return s;
}

void ErrorAccumulator::add(const Vector& X, double t, double tau) {
  const Snapshot s = snapshot(X, t);
  for (ErrorNorm n : {E_UF_H1, E_PF_L2, E_UP_L2}) {
    err_[n] += tau * s.error_sq[n];
    ref_[n] += tau * s.exact_sq[n];
  }
  for (ErrorNorm n : {E_PP_LINF_L2, E_ETA_LINF_H1}) {
    err_[n] = std::max(err_[n], s.error_sq[n]);
    ref_[n] = std::max(ref_[n], s.exact_sq[n]);
  }
}

std::array<double, N_ERROR_NORMS> ErrorAccumulator::absolute() const {
  std::array<double, N_ERROR_NORMS> a{};
  for (int n = 0; n < N_ERROR_NORMS; ++n) a[n] = std::sqrt(err_[n]);
  return a;
}

std::array<ErrorValue, N_ERROR_NORMS> ErrorAccumulator::relative() const {
  std::array<ErrorValue, N_ERROR_NORMS> r{};
  for (int n = 0; n < N_ERROR_NORMS; ++n) {
    if (ref_[n] > 0.0) {
      r[n] = {std::sqrt(err_[n] / ref_[n]), false};
    } else {
      r[n] = {std::sqrt(err_[n]), true};
    }
  }
  return r;
}

EnergyIdentity::EnergyIdentity(const Operators& ops, const PhysicalParams& params,
                               const std::array<int, N_FIELDS + 1>& offsets)
    : ops_(&ops), s0_(params.s0), o_(offsets) {}

double EnergyIdentity::energy(const Vector& X) const {
  const Vector p = field(X, o_, PP), eta = field(X, o_, ETA);
  return 0.5 * (s0_ * p.dot(ops_->M_p * p) + eta.dot(ops_->A_e * eta));
}

double EnergyIdentity::residual(const StepInfo& step) const {
  const Operators& op = *ops_;
  const double tau = step.tau;
  const Vector uf = field(step.X, o_, UF), up = field(step.X, o_, UP);
  const Vector deta = (field(step.X, o_, ETA) - field(step.X_prev, o_, ETA)) / tau;
  const Vector dp = (field(step.X, o_, PP) - field(step.X_prev, o_, PP)) / tau;

  // (E^n - E^{n-1}) / tau + tau/2 (s0 |d p|^2 + a_e(d eta, d eta)) collapsed to
  // s0 (d p, p^n) + a_e(d eta, eta^n), which avoids cancellation when the
  // state barely changes.
  const double lhs = s0_ * dp.dot(op.M_p * field(step.X, o_, PP)) + deta.dot(op.A_e * field(step.X, o_, ETA)) +
                     uf.dot(op.A_f * uf) +
                     up.dot(op.A_p * up) + uf.dot(op.bjs.ff * uf) - 2.0 * uf.dot(op.bjs.fe * deta) +
                     deta.dot(op.bjs.ee * deta);

  Vector Y = step.X;
  Y.segment(o_[ETA], deta.size()) = deta;
  const Vector reaction = step.solver.rotated_residual(step.X, step.rhs);
  const Vector Yr = step.constraints.Q().transpose() * Y;
  double rhs = Y.dot(step.load);
  for (int i : step.solver.indices()) rhs += Yr[i] * reaction[i];

  const double den = std::abs(lhs) + std::abs(rhs);
  return den == 0.0 ? 0.0 : std::abs(lhs - rhs) / den;
}

double constraint_residual(const Operators& ops, const StepInfo& step) {
  const double xn = step.X.norm();
  if (xn == 0.0) return 0.0;
  // u_f, u_p and eta lead the block layout.
  const int nuf = static_cast<int>(ops.A_f.rows()), nup = static_cast<int>(ops.A_p.rows()),
            ne = static_cast<int>(ops.A_e.rows());
  const Vector uf = step.X.segment(0, nuf), up = step.X.segment(nuf, nup);
  const Vector deta = (step.X.segment(nuf + nup, ne) - step.X_prev.segment(nuf + nup, ne)) / step.tau;
  const Vector r = ops.gamma.f * uf + ops.gamma.p * up + ops.gamma.e * deta;
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff() / xn;
}

double ErrorReport::rate(std::size_t level, ErrorNorm n) const {
  if (level == 0 || level >= levels.size()) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(levels[level - 1].errors[n].value / levels[level].errors[n].value);
}

LevelResult run_example1(ElementSet set, int n_poro, int n_fluid, double T, double tau) {
  const auto [fluid, poro] = example1_meshes(n_poro, n_fluid);
  const Discretization d(fluid, poro, set);
  const PhysicalParams params = example1_params();
  const Operators ops = assemble_operators(d, params);
  const BlockSystem sys = build_system(ops, params, d.offsets());
  const ManufacturedSolution ms = example1_solution();
  const ProblemData data = example1_problem(ms, example1_sources(params));
  const EnergyIdentity energy(ops, params, sys.offsets);

  LevelResult out;
  out.h = 1.0 / n_poro;
  out.n_dofs = sys.size();
  ErrorAccumulator acc(d, ms);
  TransientConfig cfg;
  cfg.T = T;
  cfg.tau = tau;
  cfg.on_step = [&](const StepInfo& s) {
    acc.add(s.X, s.t, s.tau);
    out.max_constraint_residual = std::max(out.max_constraint_residual, constraint_residual(ops, s));
    out.max_energy_residual = std::max(out.max_energy_residual, energy.residual(s));
  };
  run_transient(d, sys, data, cfg);
  out.errors = acc.relative();
  return out;
}

ErrorReport convergence_study(ElementSet set, int levels, bool matching) {
  if (levels < 1) throw InvalidArgument("convergence_study: need at least one level");
  ErrorReport report;
  for (int k = 0; k < levels; ++k) {
    const int n = 8 << k;
    report.levels.push_back(run_example1(set, n, matching ? n : 5 * n / 8));
  }
  return report;
}

void write_convergence_csv(const ErrorReport& report, std::ostream& out) {
  out << "h";
  for (int n = 0; n < N_ERROR_NORMS; ++n) out << ',' << to_string(static_cast<ErrorNorm>(n)) << ",rate";
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < report.levels.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.3e", report.levels[k].h);
    out << buf;
    for (int n = 0; n < N_ERROR_NORMS; ++n) {
      std::snprintf(buf, sizeof buf, "%.3e", report.levels[k].errors[n].value);
      out << ',' << buf << ',';
      if (k > 0) {
        std::snprintf(buf, sizeof buf, "%.2f", report.rate(k, static_cast<ErrorNorm>(n)));
        out << buf;
      } else {
        out << "--";
      }
    }
    out << '\n';
  }
}

DenseMatrix multiplier_seminorm_matrix(const AuxiliaryDarcy& aux) {
  const int nu = static_cast<int>(aux.A_p.rows()), np = static_cast<int>(aux.B_p.rows()),
            nl = static_cast<int>(aux.G_p.rows());
  if (aux.A_p.cols() != nu || aux.B_p.cols() != nu || aux.G_p.cols() != nu) {
    throw InvalidArgument("multiplier_seminorm: block sizes do not match");
  }
  std::vector<char> fixed(nu, 0);
  for (int i : aux.noflow) fixed.at(i) = 1;
  std::vector<Triplet> t;
  for (int k = 0; k < aux.A_p.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(aux.A_p, k); it; ++it) {
      if (!fixed[it.row()] && !fixed[it.col()]) t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int k = 0; k < aux.B_p.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(aux.B_p, k); it; ++it) {
      if (fixed[it.col()]) continue;
      t.emplace_back(nu + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nu + it.row(), it.value());
    }
  }
  for (int i = 0; i < nu; ++i) {
    if (fixed[i]) t.emplace_back(i, i, 1.0);
  }
  SparseMatrix kkt(nu + np, nu + np);
  kkt.setFromTriplets(t.begin(), t.end());
  const SparseLU lu(kkt);

  DenseMatrix U(nu, nl);
  const SparseMatrix Gt = aux.G_p.transpose();
  for (int j = 0; j < nl; ++j) {
    Vector rhs = Vector::Zero(nu + np);
    rhs.head(nu) = -Gt.col(j);
    for (int i : aux.noflow) rhs[i] = 0.0;
    U.col(j) = lu.solve(rhs).head(nu);
  }
  const DenseMatrix AU = aux.A_p * U;
  DenseMatrix S = U.transpose() * AU;
  return 0.5 * (S + S.transpose());
}

double multiplier_seminorm(const Vector& mu, const AuxiliaryDarcy& aux) {
  const DenseMatrix S = multiplier_seminorm_matrix(aux);
  return std::sqrt(std::max(0.0, mu.dot(S * mu)));
}

namespace {

// Gram matrix of the natural norm of a space: H1 for Lagrange vectors,
// H(div) for RT, L2 for scalars.
SparseMatrix gram_matrix(const FESpace& V) {
  const int deg = polynomial_degree(V.family());
  const auto rule = triangle_rule(std::min(10, 2 * deg + 1));
  const bool rt = is_raviart_thomas(V.family());
  const bool vec = is_vector_lagrange(V.family());
  const int n = V.n_local();
  return assemble_cells(V.n_dofs(), V.n_dofs(), V.mesh().n_cells(), [&] {
    return [cv = CellValues(V, rule), n, rt, vec](int c, std::vector<Triplet>& out) mutable {
      cv.reinit(c);
      const auto dofs = cv.dofs();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int q = 0; q < cv.n_points(); ++q) {
            double v = cv.value(i, q).dot(cv.value(j, q));
            if (rt) v += cv.div(i, q) * cv.div(j, q);
            if (vec) v += (cv.grad(i, q).array() * cv.grad(j, q).array()).sum();
            s += v * cv.JxW(q);
          }
          out.emplace_back(dofs[i], dofs[j], s);
        }
      }
    };
  });
}

// Columns of m listed in `keep`, in that order.
SparseMatrix select_columns(const SparseMatrix& m, const std::vector<int>& keep) {
  std::vector<int> pos(m.cols(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) pos[keep[k]] = static_cast<int>(k);
  std::vector<Triplet> t;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (pos[it.col()] >= 0) t.emplace_back(it.row(), pos[it.col()], it.value());
    }
  }
  SparseMatrix out(m.rows(), static_cast<Eigen::Index>(keep.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

std::vector<int> free_dofs(const FESpace& V, const std::string& wall) {
  std::vector<char> fixed(V.n_dofs(), 0);
  if (!wall.empty() && !is_raviart_thomas(V.family())) {
    for (int i : V.boundary_dofs(wall)) fixed[i] = 1;
  }
  std::vector<int> keep;
  for (int i = 0; i < V.n_dofs(); ++i) {
    if (!fixed[i]) keep.push_back(i);
  }
  return keep;
}

void place_block(std::vector<Triplet>& t, const SparseMatrix& m, int r0, int c0, double scale) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
  }
}

}  // namespace

InfSupResult inf_sup_estimate(const InfSupSpaces& s, const PhysicalParams& params) {
  const auto kf = free_dofs(s.V_f, s.wall), kp = free_dofs(s.V_p, ""), ke = free_dofs(s.X_p, s.wall);
  const GammaBlocks gamma = assemble_bgamma(s.pairing, s.V_f, s.V_p, s.X_p, s.L);
  const SparseMatrix Bf = select_columns(assemble_div_coupling(s.V_f, s.W_f), kf);
  const SparseMatrix Bp = select_columns(assemble_div_coupling(s.V_p, s.W_p), kp);
  const SparseMatrix Be = select_columns(assemble_div_coupling(s.X_p, s.W_p), ke);
  const SparseMatrix Gf = select_columns(gamma.f, kf), Gp = select_columns(gamma.p, kp), Ge = select_columns(gamma.e, ke);

  const int nvf = static_cast<int>(kf.size()), nvp = static_cast<int>(kp.size()), nve = static_cast<int>(ke.size());
  const int nwf = s.W_f.n_dofs(), nwp = s.W_p.n_dofs(), nl = s.L.n_dofs();
  const int nv = nvf + nvp + nve, nw = nwf + nwp + nl;

  std::vector<Triplet> bt;
  place_block(bt, Bf, 0, 0, 1.0);
  place_block(bt, Bp, nwf, nvf, 1.0);
  place_block(bt, Be, nwf, nvf + nvp, s.alpha);
  place_block(bt, Gf, nwf + nwp, 0, 1.0);
  place_block(bt, Gp, nwf + nwp, nvf, 1.0);
  place_block(bt, Ge, nwf + nwp, nvf + nvp, 1.0);
  SparseMatrix B(nw, nv);
  B.setFromTriplets(bt.begin(), bt.end());

  auto restrict_sq = [](const SparseMatrix& m, const std::vector<int>& keep) {
    return SparseMatrix(select_columns(SparseMatrix(select_columns(m, keep).transpose()), keep).transpose());
  };
  std::vector<Triplet> gt;
  place_block(gt, restrict_sq(gram_matrix(s.V_f), kf), 0, 0, 1.0);
  place_block(gt, restrict_sq(gram_matrix(s.V_p), kp), nvf, nvf, 1.0);
  place_block(gt, restrict_sq(gram_matrix(s.X_p), ke), nvf + nvp, nvf + nvp, 1.0);
  SparseMatrix GV(nv, nv);
  GV.setFromTriplets(gt.begin(), gt.end());

  DenseMatrix GW = DenseMatrix::Zero(nw, nw);
  GW.block(0, 0, nwf, nwf) = DenseMatrix(mass_matrix(s.W_f));
  GW.block(nwf, nwf, nwp, nwp) = DenseMatrix(mass_matrix(s.W_p));
  AuxiliaryDarcy aux{assemble_darcy_mass(s.V_p, params), assemble_div_coupling(s.V_p, s.W_p), gamma.p, {}};
  GW.block(nwf + nwp, nwf + nwp, nl, nl) =
      DenseMatrix(assemble_multiplier_mass(s.pairing, s.L)) + multiplier_seminorm_matrix(aux);

  Eigen::SimplicialLDLT<SparseMatrix> chol(GV);
  if (chol.info() != Eigen::Success) throw std::runtime_error("inf_sup_estimate: Gram matrix is not SPD");
  const DenseMatrix Bt = DenseMatrix(SparseMatrix(B.transpose()));
  const DenseMatrix Z = chol.solve(Bt);
  DenseMatrix S = B * Z;
  S = 0.5 * (S + S.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig(S, GW);
  if (eig.info() != Eigen::Success) throw std::runtime_error("inf_sup_estimate: eigensolver failed");
  const Vector ev = eig.eigenvalues();
  InfSupResult r;
  r.beta = std::sqrt(std::max(0.0, ev.minCoeff()));
  for (Eigen::Index k = 0; k < ev.size(); ++k) r.kernel_dim += ev[k] <= 1e-12 * ev.maxCoeff() ? 1 : 0;
  if (r.kernel_dim > 0) r.beta = 0.0;
  if (r.kernel_dim < ev.size()) r.beta_nonzero = std::sqrt(ev[r.kernel_dim]);
  return r;
}

InfSupResult inf_sup_example1(int n, bool unstable_stokes) {
  const auto [fluid, poro] = example1_meshes(n, n);
  const FESpace V_f(fluid, unstable_stokes ? ElementFamily::VecP1 : ElementFamily::VecP1bubble);
  const FESpace W_f(fluid, ElementFamily::P1);
  const FESpace V_p(poro, ElementFamily::RT0), W_p(poro, ElementFamily::P0), X_p(poro, ElementFamily::VecP1);
  const InterfacePairing pairing = common_refinement(*fluid, *poro);
  const MultiplierSpace L(pairing, 0);
  const PhysicalParams params = example1_params();
  return inf_sup_estimate(InfSupSpaces{V_f, W_f, V_p, W_p, X_p, pairing, L, params.alpha, tags::wall}, params);
}

std::vector<double> stability_energies(ElementSet set, int n, int steps, double tau, unsigned seed) {
  const auto [fluid, poro] = example1_meshes(n, n);
  const Discretization d(fluid, poro, set);
  const PhysicalParams params = example1_params();
  const Operators ops = assemble_operators(d, params);
  const BlockSystem sys = build_system(ops, params, d.offsets());
  const EnergyIdentity energy(ops, params, sys.offsets);

  ProblemData data;
  data.essential = {{UF, tags::wall, {}}, {ETA, tags::wall, {}}};
  data.pressure_tags = {tags::wall};

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector X0 = Vector::Zero(sys.size());
  for (Field f : {ETA, PP}) {
    for (int i = sys.offsets[f]; i < sys.offsets[f + 1]; ++i) X0[i] = unit(rng);
  }

  std::vector<double> out;
  TransientConfig cfg;
  cfg.T = steps * tau;
  cfg.tau = tau;
  cfg.initial = X0;
  cfg.on_step = [&](const StepInfo& s) {
    if (out.empty()) out.push_back(energy.energy(s.X_prev));
    out.push_back(energy.energy(s.X));
  };
  run_transient(d, sys, data, cfg);
  return out;
}

double PatchResult::max_error() const {
  double m = lambda_error;
  for (double e : absolute) m = std::max(m, e);
  return m;
}

PatchResult patch_test(ElementSet set, int n) {
  // Steady state in every discrete space: constant velocities and pressure,
  // linear displacement with traction balancing the pressure jump.
  constexpr double P = 2.0;
  const Vec2 Uf(0.5, 0.0), Up(0.3, 0.0);
  ManufacturedSolution ms;
  ms.u_f = [Uf](const Vec2&, double) { return Uf; };
  ms.grad_u_f = [](const Vec2&, double) { return Mat2(Mat2::Zero()); };
  ms.p_f = [](const Vec2&, double) { return P; };
  ms.u_p = [Up](const Vec2&, double) { return Up; };
  ms.p_p = ms.p_f;
  ms.eta = [](const Vec2& x, double) { return Vec2(3.0 * x.x(), -x.y()); };
  ms.grad_eta = [](const Vec2&, double) { return mat(3.0, 0.0, 0.0, -1.0); };
  ms.lambda = ms.p_p;

  PhysicalParams params = example1_params();
  params.alpha_bjs = 0.0;
  const auto [fluid, poro] = example1_meshes(n, n);
  const Discretization d(fluid, poro, set);
  const Operators ops = assemble_operators(d, params);
  const BlockSystem sys = build_system(ops, params, d.offsets());

  ProblemData data;
  data.g_p = [g = Vec2(params.mu * params.K_at(0).inverse() * Up)](const Vec2&, double) { return g; };
  data.pressure_tags = {tags::wall};
  data.p_D = ms.p_p;
  data.essential = {{UF, tags::wall, ms.u_f}, {ETA, tags::wall, ms.eta}};
  data.p_p0 = [](const Vec2&) { return P; };
  data.eta0 = [eta = ms.eta](const Vec2& x) { return eta(x, 0.0); };

  TransientConfig cfg;
  cfg.T = 0.2;
  cfg.tau = 0.1;
  const Vector X = run_transient(d, sys, data, cfg).back().X;

  PatchResult r;
  const auto snap = ErrorAccumulator(d, ms).snapshot(X, cfg.T);
  for (int k = 0; k < N_ERROR_NORMS; ++k) r.absolute[k] = std::sqrt(snap.error_sq[k]);
  const Vector lam = field(X, sys.offsets, LAM);
  for (int i = 0; i < lam.size(); ++i) {
    const double expected = i % d.L.n_local() == 0 ? P : 0.0;
    r.lambda_error = std::max(r.lambda_error, std::abs(lam[i] - expected));
  }
  return r;
}

}  // namespace sbfem
