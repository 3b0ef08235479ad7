#include "sbfem/linear_solver.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "sbfem/error.hpp"

namespace sbfem {

struct SparseLU::Impl {
  bool dense = false;
  Eigen::FullPivLU<DenseMatrix> dense_lu;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> sparse_lu;
};

namespace {

// First structurally empty row or column, or -1.
Eigen::Index empty_line(const SparseMatrix& m) {
  Vector row_abs = Vector::Zero(m.rows()), col_abs = Vector::Zero(m.cols());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      row_abs[it.row()] += std::abs(it.value());
      col_abs[it.col()] += std::abs(it.value());
    }
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (row_abs[i] == 0.0 || col_abs[i] == 0.0) return i;
  }
  return -1;
}

}  // namespace

SparseLU::SparseLU(const SparseMatrix& m, int dense_threshold) : matrix_(m), impl_(std::make_unique<Impl>()) {
  if (m.rows() != m.cols()) throw InvalidArgument("SparseLU: matrix is not square");
  matrix_.makeCompressed();
  if (const auto i = empty_line(matrix_); i >= 0) {
    throw SingularMatrix(i, "structurally singular matrix: empty row or column " + std::to_string(i));
  }
  if (m.rows() < dense_threshold) {
    impl_->dense = true;
    impl_->dense_lu.setThreshold(1e-14);
    impl_->dense_lu.compute(DenseMatrix(matrix_));
    const auto rank = impl_->dense_lu.rank();
    if (rank < m.rows()) throw SingularMatrix(rank, "numerically singular matrix");
    return;
  }
  impl_->sparse_lu.compute(matrix_);
  if (impl_->sparse_lu.info() != Eigen::Success) {
    // Eigen reports the failing column as the trailing number of the message.
    const std::string msg = impl_->sparse_lu.lastErrorMessage();
    Eigen::Index pivot = -1;
    const auto pos = msg.find_last_not_of("0123456789");
    if (pos != std::string::npos && pos + 1 < msg.size()) pivot = std::stol(msg.substr(pos + 1));
    throw SingularMatrix(pivot, "sparse LU factorization failed: " + msg);
  }
}

SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

bool SparseLU::is_dense() const { return impl_->dense; }

Vector SparseLU::solve(const Vector& b) const {
  auto raw = [this](const Vector& r) -> Vector {
    return impl_->dense ? Vector(impl_->dense_lu.solve(r)) : Vector(impl_->sparse_lu.solve(r));
  };
  Vector x = raw(b);
  const double bn = b.norm();
  if (bn == 0.0) return x;
  double rel = (b - matrix_ * x).norm() / bn;
  for (int it = 0; it < 4 && rel > 1e-12; ++it) {
    const Vector dx = raw(b - matrix_ * x);
    const Vector xn = x + dx;
    const double rn = (b - matrix_ * xn).norm() / bn;
    if (!(rn < rel)) break;
    x = xn;
    rel = rn;
  }
  return x;
}

}  // namespace sbfem
