#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

namespace sbfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Worker count for element loops: SB_THREADS if set and positive, else the
/// number of hardware threads.
inline int assembly_threads() {
  if (const char* env = std::getenv("SB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

template <class Out, class MakeWorker>
std::vector<std::vector<Out>> run_cell_chunks(int n_cells, MakeWorker& make_worker) {
  const int nt = std::max(1, std::min(assembly_threads(), n_cells));
  std::vector<std::vector<Out>> parts(nt);
  auto run = [&](int t) {
    auto worker = make_worker();
    const int begin = static_cast<int>(static_cast<long>(n_cells) * t / nt);
    const int end = static_cast<int>(static_cast<long>(n_cells) * (t + 1) / nt);
    for (int c = begin; c < end; ++c) worker(c, parts[t]);
  };
  if (nt == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
  }
  return parts;
}

}  // namespace detail

/// Element loop over contiguous cell chunks. `make_worker()` is called once
/// per thread and must return a callable `(int cell, std::vector<Triplet>&)`.
/// Chunks are concatenated in cell order, so the summation order (and the
/// result) does not depend on the thread count.
template <class MakeWorker>
SparseMatrix assemble_cells(Eigen::Index rows, Eigen::Index cols, int n_cells, MakeWorker make_worker) {
  auto parts = detail::run_cell_chunks<Triplet>(n_cells, make_worker);
  std::vector<Triplet> all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  SparseMatrix m(rows, cols);
  m.setFromTriplets(all.begin(), all.end());
  return m;
}

/// Vector counterpart of assemble_cells; workers emit (index, value) pairs.
template <class MakeWorker>
Vector assemble_cells_vector(Eigen::Index size, int n_cells, MakeWorker make_worker) {
  auto parts = detail::run_cell_chunks<std::pair<int, double>>(n_cells, make_worker);
  Vector v = Vector::Zero(size);
  for (const auto& p : parts) {
    for (const auto& [i, x] : p) v[i] += x;
  }
  return v;
}

}  // namespace sbfem
