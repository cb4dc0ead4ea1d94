#include <gtest/gtest.h>

#include "gstiefel/kernels.hpp"

namespace gstiefel {
namespace {

// Naive triple loops as the oracle for both implementations.
Matrix naive_multiply(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (Index k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(s);
    }
  return out;
}

double naive_trace_inner(const Matrix& a, const Matrix& b) {
  long double s = 0.0L;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) s += static_cast<long double>(a(i, j)) * b(i, j);
  return static_cast<double>(s);
}

class ThreadGuard {
 public:
  ThreadGuard() : saved_(kernels::num_threads()) {}
  ~ThreadGuard() { kernels::set_num_threads(saved_); }

 private:
  int saved_;
};

struct Shape {
  Index rows, inner, cols;
};

class KernelShapes : public ::testing::TestWithParam<Shape> {};

TEST_P(KernelShapes, SerialMatchesNaive) {
  const auto [r, k, c] = GetParam();
  Rng rng(7);
  const Matrix a = gaussian_matrix(r, k, rng);
  const Matrix b = gaussian_matrix(k, c, rng);
  const Matrix ta = gaussian_matrix(r, c, rng);
  const Matrix ref = naive_multiply(a, b);
  EXPECT_LE((kernels::serial::multiply(a, b) - ref).norm(), 1e-13 * (1.0 + ref.norm()));
  const Matrix g = naive_multiply(a.transpose(), ta);
  EXPECT_LE((kernels::serial::transpose_multiply(a, ta) - g).norm(), 1e-13 * (1.0 + g.norm()));
  const Matrix a2 = gaussian_matrix(r, c, rng);
  EXPECT_NEAR(kernels::serial::trace_inner(a2, ta), naive_trace_inner(a2, ta),
              1e-13 * (1.0 + a2.norm() * ta.norm()));
}

TEST_P(KernelShapes, ParallelMatchesSerial) {
  const auto [r, k, c] = GetParam();
  ThreadGuard guard;
  kernels::set_num_threads(4);
  Rng rng(11);
  const Matrix a = gaussian_matrix(r, k, rng);
  const Matrix b = gaussian_matrix(k, c, rng);
  const Matrix tb = gaussian_matrix(r, k, rng);
  const Matrix ref = kernels::serial::multiply(a, b);
  EXPECT_LE((kernels::parallel::multiply(a, b) - ref).norm(), 1e-13 * (1.0 + ref.norm()));
  const Matrix g = kernels::serial::transpose_multiply(a, tb);
  EXPECT_LE((kernels::parallel::transpose_multiply(a, tb) - g).norm(),
            1e-13 * (1.0 + g.norm()));
  EXPECT_NEAR(kernels::parallel::trace_inner(a, tb), kernels::serial::trace_inner(a, tb),
              1e-13 * (1.0 + a.norm() * tb.norm()));
}

INSTANTIATE_TEST_SUITE_P(Shapes, KernelShapes,
                         ::testing::Values(Shape{1, 1, 1}, Shape{7, 3, 2},
                                           Shape{128, 5, 5}, Shape{129, 10, 4},
                                           Shape{300, 300, 5}, Shape{513, 40, 7}));

TEST(Kernels, ParallelBitwiseIndependentOfThreadCount) {
  ThreadGuard guard;
  Rng rng(3);
  const Matrix a = gaussian_matrix(700, 700, rng);
  const Matrix b = gaussian_matrix(700, 6, rng);
  kernels::set_num_threads(1);
  const Matrix m1 = kernels::parallel::multiply(a, b);
  const Matrix g1 = kernels::parallel::transpose_multiply(b, b);
  const double s1 = kernels::parallel::trace_inner(b, m1);
  for (int threads : {2, 3, 4, 8}) {
    kernels::set_num_threads(threads);
    EXPECT_EQ(kernels::parallel::multiply(a, b), m1) << threads;
    EXPECT_EQ(kernels::parallel::transpose_multiply(b, b), g1) << threads;
    EXPECT_EQ(kernels::parallel::trace_inner(b, m1), s1) << threads;
  }
}

TEST(Kernels, DispatcherAgreesWithBothPaths) {
  ThreadGuard guard;
  Rng rng(5);
  const Matrix a = gaussian_matrix(400, 400, rng);
  const Matrix b = gaussian_matrix(400, 3, rng);
  kernels::set_num_threads(1);
  EXPECT_EQ(kernels::multiply(a, b), kernels::serial::multiply(a, b));
  kernels::set_num_threads(2);
  EXPECT_EQ(kernels::multiply(a, b), kernels::parallel::multiply(a, b));
  // Short operands always take the serial path.
  const Matrix s = gaussian_matrix(50, 3, rng);
  EXPECT_EQ(kernels::trace_inner(s, s), kernels::serial::trace_inner(s, s));
}

TEST(Kernels, ThreadCountClamped) {
  ThreadGuard guard;
  kernels::set_num_threads(0);
  EXPECT_EQ(kernels::num_threads(), 1);
  kernels::set_num_threads(-3);
  EXPECT_EQ(kernels::num_threads(), 1);
}

TEST(Kernels, ShapeErrors) {
  const Matrix a = Matrix::Ones(3, 2);
  const Matrix b = Matrix::Ones(3, 2);
  EXPECT_THROW(kernels::serial::multiply(a, b), DimensionError);
  EXPECT_THROW(kernels::parallel::multiply(a, b), DimensionError);
  EXPECT_THROW(kernels::parallel::transpose_multiply(a, Matrix::Ones(4, 2)), DimensionError);
  EXPECT_THROW(kernels::parallel::trace_inner(a, Matrix::Ones(3, 3)), DimensionError);
}

TEST(Kernels, EmptyOperands) {
  const Matrix a(0, 3);
  const Matrix b(0, 2);
  EXPECT_EQ(kernels::parallel::transpose_multiply(a, b), Matrix::Zero(3, 2));
  EXPECT_EQ(kernels::parallel::trace_inner(a, a), 0.0);
}

}  // namespace
}  // namespace gstiefel
