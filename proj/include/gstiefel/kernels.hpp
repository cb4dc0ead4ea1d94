#pragma once

// Dense kernels behind every n-sized product in the library.
//
// Two implementations share one interface: `serial` is the reference used in
// tests and for single-threaded runs, `parallel` splits the tall dimension into
// fixed row blocks and runs them under OpenMP. Block boundaries do not depend
// on the thread count, so a parallel result is reproducible for any number of
// threads. The dispatching functions at namespace scope pick the parallel path
// only when more than one thread is configured, the operand is tall enough,
// and we are not already inside a parallel region (e.g. parallel trials).

#include "gstiefel/types.hpp"

namespace gstiefel::kernels {

inline constexpr Index kRowBlock = 128;

namespace serial {
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose_multiply(const Matrix& a, const Matrix& b);
double trace_inner(const Matrix& a, const Matrix& b);
}  // namespace serial

namespace parallel {
/// a * b, row blocks of a in parallel.
Matrix multiply(const Matrix& a, const Matrix& b);
/// a^T * b for tall a, b: per-block partial Gram matrices summed in block order.
Matrix transpose_multiply(const Matrix& a, const Matrix& b);
/// tr(a^T b) = sum_ij a_ij b_ij, per-block partial sums added in block order.
double trace_inner(const Matrix& a, const Matrix& b);
}  // namespace parallel

/// Thread count used by the dispatching kernels. Values < 1 are clamped to 1.
void set_num_threads(int threads);
int num_threads();

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose_multiply(const Matrix& a, const Matrix& b);
double trace_inner(const Matrix& a, const Matrix& b);

}  // namespace gstiefel::kernels
