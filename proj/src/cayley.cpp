#include "gstiefel/cayley.hpp"

#include <cmath>

#include "gstiefel/kernels.hpp"

namespace gstiefel {

namespace {

// Reciprocal condition estimate below which a Cayley system is rejected.
constexpr double kSingularRcond = 1e-14;

void check_lu(const Eigen::PartialPivLU<Matrix>& lu, const char* what) {
  const double rc = lu.rcond();
  if (!std::isfinite(rc) || rc < kSingularRcond)
    throw StepTooLargeError(std::string(what) + ": Cayley system is singular");
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

SkewFactors build_factors(const Matrix& x, const Matrix& mx, const Matrix& z,
                          const Matrix& mz) {
  const Matrix xtmz = kernels::transpose_multiply(mx, z);
  const Matrix pz = z - 0.5 * x * xtmz;
  const Matrix mpz = mz - 0.5 * mx * xtmz;

  SkewFactors f;
  f.u = hcat(pz, x);
  f.v = hcat(x, -pz);
  f.mu = hcat(mpz, mx);
  f.mv = hcat(mx, -mpz);
  return f;
}

}  // namespace

bool uses_low_rank(RetractionStrategy strategy, Index n, Index p) {
  switch (strategy) {
    case RetractionStrategy::Full:
      return false;
    case RetractionStrategy::LowRank:
      return true;
    case RetractionStrategy::Auto:
      break;
  }
  return 4 * p <= n;
}

SkewFactors skew_factors(const ManifoldPoint& x, const TangentVector& z) {
  if (z.base() != x.id())
    throw DimensionError("skew_factors: tangent vector is not based at x");
  return build_factors(x.x(), x.mx(), z.z(), z.mz());
}

CayleyStep::CayleyStep(const MetricContext& ctx, const ManifoldPoint& x,
                       const TangentVector& z, double t,
                       RetractionStrategy strategy)
    : ctx_(&ctx),
      x_(x.x()),
      mx_(x.mx()),
      base_(x.id()),
      z_(z),
      t_(t),
      low_rank_(uses_low_rank(strategy, x.rows(), x.cols())),
      factors_(skew_factors(x, z)) {
  if (x.rows() != ctx.dim())
    throw DimensionError("CayleyStep: point does not match the metric");
  if (!std::isfinite(t)) throw StepTooLargeError("CayleyStep: non-finite t");
  const double c = 0.5 * t;

  if (low_rank_) {
    m1_ = kernels::transpose_multiply(factors_.mv, x_);
    m2_ = kernels::transpose_multiply(factors_.mv, factors_.u);
    const Index r = m2_.rows();
    small_lu_.compute(Matrix::Identity(r, r) - c * m2_);
    check_lu(small_lu_, "CayleyStep");
    m3_ = small_lu_.solve(m1_);
    point_ = x_ + t * (factors_.u * m3_);
  } else {
    const Index n = x_.rows();
    const Matrix wm = kernels::multiply(factors_.dense(), ctx.matrix());
    dense_lu_.compute(Matrix::Identity(n, n) - c * wm);
    check_lu(dense_lu_, "CayleyStep");
    dense_plus_ = Matrix::Identity(n, n) + c * wm;
    point_ = dense_lu_.solve(kernels::multiply(dense_plus_, x_));
  }
  if (!point_.allFinite())
    throw StepTooLargeError("CayleyStep: retraction produced non-finite values");
}

ManifoldPoint CayleyStep::retracted_point() const {
  return ManifoldPoint(*ctx_, point_);
}

TangentVector CayleyStep::make_tangent(Matrix z, Matrix mz,
                                       const ManifoldPoint& at) const {
  return TangentVector(std::move(z), std::move(mz), at.id());
}

TangentVector CayleyStep::make_tangent(Matrix z, const ManifoldPoint& at) const {
  Matrix mz = ctx_->apply(z);
  return TangentVector(std::move(z), std::move(mz), at.id());
}

void CayleyStep::check_base(const TangentVector& y) const {
  if (y.base() != base_)
    throw DimensionError("CayleyStep: transported vector is not based at x");
}

TangentVector CayleyStep::transport_diff_direction(const ManifoldPoint& at) const {
  const double c = 0.5 * t_;
  if (low_rank_) {
    // U [M1 + c M2 M3 + c K^{-1} M2 M3]
    const Matrix m2m3 = m2_ * m3_;
    const Matrix coeff = m1_ + c * m2m3 + c * small_lu_.solve(m2m3);
    return make_tangent(factors_.u * coeff, factors_.mu * coeff, at);
  }
  return make_tangent(dense_lu_.solve(dense_lu_.solve(z_.z())), at);
}

TangentVector CayleyStep::transport_diff(const TangentVector& y,
                                         const ManifoldPoint& at) const {
  check_base(y);
  const double c = 0.5 * t_;
  const SkewFactors fy = build_factors(x_, mx_, y.z(), y.mz());

  if (low_rank_) {
    // B1 = (I - c W_Z M)^{-1} X = X + c U M3
    const Matrix b1 = x_ + c * (factors_.u * m3_);
    // C = W_Y M B1 = U_Y (V_Y^T M B1)
    const Matrix g = kernels::transpose_multiply(fy.mv, b1);
    const Matrix cz = fy.u * g;
    const Matrix mcz = fy.mu * g;
    // (I - c W_Z M)^{-1} C = C + c U K^{-1} V^T M C
    const Matrix h = small_lu_.solve(kernels::transpose_multiply(factors_.mv, cz));
    return make_tangent(cz + c * (factors_.u * h), mcz + c * (factors_.mu * h), at);
  }
  const Matrix b1 = dense_lu_.solve(x_);
  const Matrix wy_m_b1 = kernels::multiply(fy.dense(), ctx_->apply(b1));
  return make_tangent(dense_lu_.solve(wy_m_b1), at);
}

TangentVector CayleyStep::transport_iso_direction(const ManifoldPoint& at) const {
  if (low_rank_) {
    // U (M1 + t M2 M3)
    const Matrix coeff = m1_ + t_ * (m2_ * m3_);
    return make_tangent(factors_.u * coeff, factors_.mu * coeff, at);
  }
  return make_tangent(dense_lu_.solve(kernels::multiply(dense_plus_, z_.z())), at);
}

TangentVector CayleyStep::transport_iso(const TangentVector& y,
                                        const ManifoldPoint& at) const {
  check_base(y);
  if (low_rank_) {
    // Y + t U K^{-1} V^T M Y
    const Matrix h = small_lu_.solve(kernels::transpose_multiply(factors_.mv, y.z()));
    return make_tangent(y.z() + t_ * (factors_.u * h),
                        y.mz() + t_ * (factors_.mu * h), at);
  }
  return make_tangent(dense_lu_.solve(kernels::multiply(dense_plus_, y.z())), at);
}

ManifoldPoint retract(const MetricContext& ctx, const ManifoldPoint& x,
                      const TangentVector& z, double t,
                      RetractionStrategy strategy) {
  if (t == 0.0) {
    if (z.base() != x.id())
      throw DimensionError("retract: tangent vector is not based at x");
    return x;
  }
  return CayleyStep(ctx, x, z, t, strategy).retracted_point();
}

TangentVector transport_diff(const MetricContext& ctx, const ManifoldPoint& x,
                             const TangentVector& z, double t,
                             const TangentVector& y,
                             RetractionStrategy strategy) {
  const CayleyStep step(ctx, x, z, t, strategy);
  return step.transport_diff(y, step.retracted_point());
}

TangentVector transport_diff_direction(const MetricContext& ctx,
                                       const ManifoldPoint& x,
                                       const TangentVector& z, double t,
                                       RetractionStrategy strategy) {
  const CayleyStep step(ctx, x, z, t, strategy);
  return step.transport_diff_direction(step.retracted_point());
}

TangentVector transport_iso(const MetricContext& ctx, const ManifoldPoint& x,
                            const TangentVector& z, double t,
                            const TangentVector& y, RetractionStrategy strategy) {
  const CayleyStep step(ctx, x, z, t, strategy);
  return step.transport_iso(y, step.retracted_point());
}

TangentVector transport_iso_direction(const MetricContext& ctx,
                                      const ManifoldPoint& x,
                                      const TangentVector& z, double t,
                                      RetractionStrategy strategy) {
  const CayleyStep step(ctx, x, z, t, strategy);
  return step.transport_iso_direction(step.retracted_point());
}

AngleBound angle_bound(const MetricContext& ctx, const ManifoldPoint& x,
                       const TangentVector& z, double t) {
  if (x.rows() > 500)
    throw DimensionError("angle_bound: dense diagnostic limited to n <= 500");
  if (!(norm(z) > 0.0)) throw DegeneracyError("angle_bound: zero direction");

  const CayleyStep step(ctx, x, z, t, RetractionStrategy::Auto);
  const ManifoldPoint at = step.retracted_point();
  const TangentVector diff = step.transport_diff_direction(at);
  const TangentVector iso = step.transport_iso_direction(at);

  AngleBound out;
  out.cos_theta = inner(diff, iso) / (norm(diff) * norm(iso));

  const Vector gamma =
      Eigen::SelfAdjointEigenSolver<Matrix>(ctx.matrix(), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .cwiseAbs();
  const Vector beta = Eigen::EigenSolver<Matrix>(step.factors().dense(), false)
                          .eigenvalues()
                          .imag()
                          .cwiseAbs();
  const double g1 = gamma.minCoeff(), gn = gamma.maxCoeff();
  const double b1 = beta.minCoeff(), bn = beta.maxCoeff();
  out.lower_bound = std::sqrt((4.0 + t * t * b1 * b1 * g1 * g1) /
                              (4.0 + t * t * bn * bn * gn * gn));
  return out;
}

}  // namespace gstiefel
