#include "gstiefel/kernels.hpp"

#include <omp.h>

#include <atomic>

namespace gstiefel::kernels {

namespace {

std::atomic<int> g_threads{1};

void require_same_rows(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows())
    throw DimensionError(std::string(what) + ": row counts differ (" +
                         std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()) + ")");
}

bool use_parallel(Index rows) {
  return g_threads.load(std::memory_order_relaxed) > 1 &&
         rows >= 2 * kRowBlock && !omp_in_parallel();
}

}  // namespace

namespace serial {

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("multiply: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  out.noalias() = a * b;
  return out;
}

Matrix transpose_multiply(const Matrix& a, const Matrix& b) {
  require_same_rows(a, b, "transpose_multiply");
  Matrix out(a.cols(), b.cols());
  out.noalias() = a.transpose() * b;
  return out;
}

double trace_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("trace_inner: shapes differ");
  return (a.array() * b.array()).sum();
}

}  // namespace serial

void set_num_threads(int threads) {
  g_threads.store(threads < 1 ? 1 : threads, std::memory_order_relaxed);
}

int num_threads() { return g_threads.load(std::memory_order_relaxed); }

Matrix multiply(const Matrix& a, const Matrix& b) {
  return use_parallel(a.rows()) ? parallel::multiply(a, b)
                                : serial::multiply(a, b);
}

Matrix transpose_multiply(const Matrix& a, const Matrix& b) {
  return use_parallel(a.rows()) ? parallel::transpose_multiply(a, b)
                                : serial::transpose_multiply(a, b);
}

double trace_inner(const Matrix& a, const Matrix& b) {
  return use_parallel(a.rows()) ? parallel::trace_inner(a, b)
                                : serial::trace_inner(a, b);
}

}  // namespace gstiefel::kernels
