#include "gstiefel/kernels.hpp"

#include <omp.h>

#include <vector>

namespace gstiefel::kernels::parallel {

namespace {

Index block_count(Index rows) { return (rows + kRowBlock - 1) / kRowBlock; }

Index block_begin(Index block) { return block * kRowBlock; }

Index block_length(Index block, Index rows) {
  return std::min(kRowBlock, rows - block_begin(block));
}

int team_size() { return kernels::num_threads(); }

}  // namespace

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("multiply: inner dimensions differ");
  const Index rows = a.rows();
  const Index blocks = block_count(rows);
  Matrix out(rows, b.cols());

#pragma omp parallel for schedule(static) num_threads(team_size())
  for (Index blk = 0; blk < blocks; ++blk) {
    const Index r0 = block_begin(blk);
    const Index len = block_length(blk, rows);
    out.middleRows(r0, len).noalias() = a.middleRows(r0, len) * b;
  }
  return out;
}

Matrix transpose_multiply(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw DimensionError("transpose_multiply: row counts differ");
  const Index rows = a.rows();
  const Index blocks = block_count(rows);
  std::vector<Matrix> partial(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(static) num_threads(team_size())
  for (Index blk = 0; blk < blocks; ++blk) {
    const Index r0 = block_begin(blk);
    const Index len = block_length(blk, rows);
    partial[static_cast<std::size_t>(blk)].noalias() =
        a.middleRows(r0, len).transpose() * b.middleRows(r0, len);
  }

  Matrix out = Matrix::Zero(a.cols(), b.cols());
  for (const Matrix& p : partial) out += p;
  return out;
}

double trace_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("trace_inner: shapes differ");
  const Index rows = a.rows();
  const Index blocks = block_count(rows);
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);

#pragma omp parallel for schedule(static) num_threads(team_size())
  for (Index blk = 0; blk < blocks; ++blk) {
    const Index r0 = block_begin(blk);
    const Index len = block_length(blk, rows);
    partial[static_cast<std::size_t>(blk)] =
        (a.middleRows(r0, len).array() * b.middleRows(r0, len).array()).sum();
  }

  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace gstiefel::kernels::parallel
