#include <gtest/gtest.h>

#include <cmath>

#include "gstiefel/manifold.hpp"
#include "gstiefel/problems.hpp"
#include "oracles.hpp"

namespace gstiefel {
namespace {

struct Fixture {
  MetricContext ctx;
  ManifoldPoint x;

  Fixture(Index n, Index p, double cond, std::uint64_t seed)
      : ctx([&] {
          std::mt19937_64 r(seed);
          return oracle::spd_with_condition(n, cond, r);
        }()) {
    std::mt19937_64 r(seed + 1);
    x = ManifoldPoint(ctx, oracle::feasible_point(ctx.matrix(), p, r));
  }
};

TEST(MetricContext, RejectsInvalidMatrices) {
  EXPECT_THROW(MetricContext(Matrix::Ones(2, 3)), NumericError);
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.5;
  EXPECT_THROW(MetricContext{asym}, NumericError);
  Matrix indef = Matrix::Identity(3, 3);
  indef(2, 2) = -1.0;
  EXPECT_THROW(MetricContext{indef}, NumericError);
}

TEST(MetricContext, ApplyAndSolve) {
  std::mt19937_64 r(2);
  const Matrix m = oracle::spd_with_condition(12, 100.0, r);
  const MetricContext ctx(m);
  const Matrix b = oracle::randn(12, 3, r);
  EXPECT_LE((ctx.apply(b) - m * b).norm(), 1e-12 * b.norm() * m.norm());
  EXPECT_LE((m * ctx.solve(b) - b).norm(), 1e-10 * b.norm());
}

TEST(Projection, HandExample) {
  const MetricContext ctx(Matrix::Identity(2, 2));
  const ManifoldPoint x(ctx, Matrix{{1.0}, {0.0}});
  const TangentVector z = project_tangent(ctx, x, Matrix{{3.5}, {-2.0}});
  EXPECT_NEAR(z.z()(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(z.z()(1, 0), -2.0, 1e-15);
}

TEST(Projection, MatchesOracleAndIsIdempotent) {
  Fixture f(30, 4, 1e3, 10);
  std::mt19937_64 r(11);
  const Matrix n = oracle::randn(30, 4, r);
  const TangentVector z = project_tangent(f.ctx, f.x, n);
  const Matrix ref = oracle::project(f.ctx.matrix(), f.x.x(), n);
  EXPECT_LE((z.z() - ref).norm(), 1e-12 * n.norm());
  EXPECT_LE((z.mz() - f.ctx.matrix() * z.z()).norm(), 1e-10 * z.mz().norm());
  const TangentVector zz = project_tangent(f.ctx, f.x, z.z());
  EXPECT_LE((zz.z() - z.z()).norm(), 1e-12 * (1.0 + z.z().norm()));
  EXPECT_LE(tangency_residual(f.x, z.z()), 1e-10);
  // The normal direction X is annihilated.
  EXPECT_LE(project_tangent(f.ctx, f.x, f.x.x()).z().norm(), 1e-12);
}

TEST(Inner, BilinearAndSymmetric) {
  Fixture f(25, 3, 1e2, 20);
  Rng rng(21);
  for (int s = 0; s < 10; ++s) {
    const Matrix a = gaussian_matrix(25, 3, rng);
    const Matrix b = gaussian_matrix(25, 3, rng);
    const Matrix c = gaussian_matrix(25, 3, rng);
    const double scale = 1.0 + a.norm() * b.norm() * f.ctx.matrix().norm();
    EXPECT_NEAR(inner(f.ctx, a, b), inner(f.ctx, b, a), 1e-12 * scale);
    EXPECT_NEAR(inner(f.ctx, 2.0 * a - 3.0 * c, b),
                2.0 * inner(f.ctx, a, b) - 3.0 * inner(f.ctx, c, b), 1e-12 * 10 * scale);
    EXPECT_NEAR(inner(f.ctx, a, b), oracle::inner(f.ctx.matrix(), a, b), 1e-12 * scale);
  }
  EXPECT_NEAR(norm(f.ctx, f.x.x()), std::sqrt(3.0), 1e-12);
}

TEST(Gradient, MetricCompatibility) {
  Fixture f(20, 3, 1e3, 30);
  Rng rng(31);
  const Matrix eg = gaussian_matrix(20, 3, rng);
  const TangentVector g = egrad_to_rgrad(f.ctx, f.x, eg);
  EXPECT_LE(tangency_residual(f.x, g.z()), 1e-10 * (1.0 + g.z().norm()));
  for (int s = 0; s < 10; ++s) {
    const TangentVector xi = random_tangent(f.ctx, f.x, rng);
    EXPECT_NEAR(inner(g, xi), (eg.transpose() * xi.z()).trace(), 1e-10 * (1.0 + eg.norm()));
  }
  EXPECT_EQ(egrad_to_rgrad(f.ctx, f.x, Matrix::Zero(20, 3)).z().norm(), 0.0);
}

TEST(Gradient, GevpWithAEqualMIsStationary) {
  std::mt19937_64 r(40);
  const Matrix m = oracle::spd_with_condition(15, 50.0, r);
  const MetricContext ctx(m);
  const ManifoldPoint x(ctx, oracle::feasible_point(m, 2, r));
  const TangentVector g = egrad_to_rgrad(ctx, x, -2.0 * m * x.x());
  EXPECT_LE(norm(g), 1e-12 * m.norm());
}

TEST(Feasibility, DirectEvaluations) {
  Fixture f(20, 4, 1e2, 50);
  EXPECT_LE(check_feasibility(f.ctx, f.x.x()), 1e-12);
  EXPECT_NEAR(check_feasibility(f.ctx, Matrix::Zero(20, 4)), 2.0, 1e-15);
  EXPECT_NEAR(check_feasibility(f.ctx, 2.0 * f.x.x()), 3.0 * 2.0, 1e-11);
  const ManifoldPoint y(f.ctx, 2.0 * f.x.x());
  EXPECT_NEAR(check_feasibility(y), 6.0, 1e-11);
}

class Orthonormalize : public ::testing::TestWithParam<double> {};

TEST_P(Orthonormalize, FeasibleUpToCondition) {
  const double cond = GetParam();
  std::mt19937_64 r(60);
  const Matrix m = oracle::spd_with_condition(50, cond, r);
  const MetricContext ctx(m);
  const Matrix a = oracle::randn(50, 5, r);
  const ManifoldPoint x = m_orthonormalize(ctx, a);
  EXPECT_LE(check_feasibility(ctx, x.x()), 1e-12) << cond;
  // span(X) = span(A): X = A R for an upper-triangular R with positive diagonal.
  const Matrix r_factor = a.colPivHouseholderQr().solve(x.x());
  EXPECT_LE((a * r_factor - x.x()).norm(), 1e-8 * x.x().norm());
  const Matrix xma = x.x().transpose() * m * a;
  for (Index i = 0; i < 5; ++i) EXPECT_GT(xma(i, i), 0.0);
  const ManifoldPoint restored = restore_feasibility(ctx, a);
  EXPECT_LE(check_feasibility(ctx, restored.x()), 1e-13) << cond;
}

INSTANTIATE_TEST_SUITE_P(Conditions, Orthonormalize,
                         ::testing::Values(1.0, 1e2, 1e4, 1e6));

TEST(Orthonormalize, IdentityMetricIsQr) {
  const MetricContext ctx(Matrix::Identity(8, 8));
  std::mt19937_64 r(70);
  const Matrix a = oracle::randn(8, 3, r);
  const ManifoldPoint x = m_orthonormalize(ctx, a);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(8, 3);
  const Matrix rr = qr.matrixQR().topRows(3).triangularView<Eigen::Upper>();
  for (Index j = 0; j < 3; ++j)
    if (rr(j, j) < 0) q.col(j) = -q.col(j);
  EXPECT_LE((x.x() - q).norm(), 1e-13);
}

TEST(Orthonormalize, AlreadyOrthonormalIsFixed) {
  Fixture f(16, 3, 1e2, 80);
  const ManifoldPoint x = m_orthonormalize(f.ctx, f.x.x());
  EXPECT_LE((x.x() - f.x.x()).norm(), 1e-12);
}

TEST(Orthonormalize, RankDeficientThrows) {
  const MetricContext ctx(Matrix::Identity(6, 6));
  Matrix a = Matrix::Zero(6, 2);
  a.col(0).setOnes();
  a.col(1) = 2.0 * a.col(0);
  EXPECT_THROW(m_orthonormalize(ctx, a), DegeneracyError);
}

TEST(Refine, ReducesSmallDefect) {
  Fixture f(40, 4, 1e4, 90);
  std::mt19937_64 r(91);
  const Matrix perturbed = f.x.x() + 1e-6 * oracle::randn(40, 4, r);
  ASSERT_GT(check_feasibility(f.ctx, perturbed), 1e-8);
  const ManifoldPoint y = refine_feasibility(f.ctx, perturbed);
  EXPECT_LE(check_feasibility(f.ctx, y.x()), 1e-14);
  EXPECT_LE((y.x() - perturbed).norm(), 1e-4);
}

TEST(RandomDraws, DeterministicAndDistinct) {
  Fixture f(30, 3, 1e2, 100);
  Rng a(5), b(5), c(6);
  const ManifoldPoint xa = random_point(f.ctx, 3, a);
  const ManifoldPoint xb = random_point(f.ctx, 3, b);
  const ManifoldPoint xc = random_point(f.ctx, 3, c);
  EXPECT_EQ(xa.x(), xb.x());
  EXPECT_GT((xa.x() - xc.x()).norm(), 1e-6);
  EXPECT_LE(check_feasibility(f.ctx, xa.x()), 1e-13);
  const TangentVector z = random_tangent(f.ctx, xa, a);
  EXPECT_NEAR(norm(z), 1.0, 1e-12);
  EXPECT_LE(tangency_residual(xa, z.z()), 1e-12);
  EXPECT_EQ(z.base(), xa.id());
}

TEST(TangentVector, ArithmeticKeepsImages) {
  Fixture f(10, 2, 10.0, 110);
  Rng rng(111);
  const TangentVector u = random_tangent(f.ctx, f.x, rng);
  const TangentVector v = random_tangent(f.ctx, f.x, rng);
  TangentVector w = 2.0 * u;
  w.add_scaled(-0.5, v);
  EXPECT_LE((w.z() - (2.0 * u.z() - 0.5 * v.z())).norm(), 1e-15);
  EXPECT_LE((w.mz() - f.ctx.matrix() * w.z()).norm(), 1e-12);
  EXPECT_NEAR(inner(w, w), inner(f.ctx, w.z(), w.z()), 1e-12);
  EXPECT_EQ((-u).z(), -u.z());
}

}  // namespace
}  // namespace gstiefel
