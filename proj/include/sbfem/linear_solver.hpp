#pragma once

#include <memory>

#include "sbfem/sparse.hpp"

namespace sbfem {

/// LU factorization of a square sparse matrix: supernodal LU with partial
/// pivoting and COLAMD ordering above `dense_threshold` unknowns, dense full
/// pivoting below it. Solves apply
/// iterative refinement until the relative residual is below 1e-12 (or
/// refinement stops helping). Throws SingularMatrix with a pivot index.
class SparseLU {
 public:
  static constexpr int kDenseThreshold = 2000;

  explicit SparseLU(const SparseMatrix& m, int dense_threshold = kDenseThreshold);
  ~SparseLU();
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;

  Vector solve(const Vector& b) const;
  bool is_dense() const;
  Eigen::Index size() const { return matrix_.rows(); }

 private:
  struct Impl;
  SparseMatrix matrix_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sbfem
