#include "gstiefel/baselines.hpp"

#include <cmath>

#include "gstiefel/kernels.hpp"

namespace gstiefel {

Matrix baseline_retract_raw(BaselineKind kind, const ManifoldPoint& x,
                            const TangentVector& z, double t) {
  if (z.base() != x.id())
    throw DimensionError("baseline_retraction: tangent vector is not based at x");
  if (t == 0.0) return x.x();

  const Matrix y = x.x() + t * z.z();
  // (X + tZ)^T M (X + tZ) with X^T M X taken as I: the retraction then leaves
  // the feasibility defect of X alone instead of correcting it by an O(eps)
  // jump that does not vanish with t and would swamp the sufficient-decrease
  // test near convergence.
  const Matrix xtmz = kernels::transpose_multiply(x.mx(), z.z());
  const Matrix gram = Matrix::Identity(x.cols(), x.cols()) + 2.0 * t * sym(xtmz) +
                      t * t * sym(kernels::transpose_multiply(z.z(), z.mz()));
  if (!gram.allFinite()) throw StepTooLargeError("baseline_retraction: non-finite step");

  if (kind == BaselineKind::CholQR) {
    const Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
      throw StepTooLargeError("baseline_retraction: Gram matrix not SPD");
    // Y L^{-T} = (L^{-1} Y^T)^T
    Matrix yt = y.transpose();
    llt.matrixL().solveInPlace(yt);
    return yt.transpose();
  }

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0))
    throw StepTooLargeError("baseline_retraction: Gram matrix not SPD");
  const Vector inv_sqrt = eig.eigenvalues().array().rsqrt();
  const Matrix gram_inv_sqrt =
      eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  return y * gram_inv_sqrt;
}

ManifoldPoint baseline_retraction(BaselineKind kind, const MetricContext& ctx,
                                  const ManifoldPoint& x, const TangentVector& z,
                                  double t) {
  if (t == 0.0) {
    if (z.base() != x.id())
      throw DimensionError("baseline_retraction: tangent vector is not based at x");
    return x;
  }
  return ManifoldPoint(ctx, baseline_retract_raw(kind, x, z, t));
}

}  // namespace gstiefel
