#pragma once

// Geometry of the generalized Stiefel manifold St_M(n,p) = {X : X^T M X = I_p}
// with the metric <U, V> = tr(U^T M V).
//
// Points and tangent vectors carry their image under M (MX, MZ) next to the
// matrix itself. Every inner product, projection and low-rank Cayley update
// only needs those n x p images, so an iteration of the solver performs a
// handful of n^2 p products instead of one per inner product.

#include <cstdint>
#include <memory>

#include "gstiefel/types.hpp"

namespace gstiefel {

/// Immutable SPD metric matrix with its Cholesky factorization.
class MetricContext {
 public:
  /// Throws NumericError if `m` is not square, not symmetric to 1e-12
  /// (relative, Frobenius) or not positive definite.
  explicit MetricContext(Matrix m);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  const Eigen::LLT<Matrix>& factorization() const { return llt_; }

  /// M * b.
  Matrix apply(const Matrix& b) const;
  /// M^{-1} * b through the cached factor.
  Matrix solve(const Matrix& b) const;

 private:
  Matrix m_;
  Eigen::LLT<Matrix> llt_;
};

using MetricPtr = std::shared_ptr<const MetricContext>;

/// An n x p matrix X on (or numerically near) St_M(n,p), with MX cached.
class ManifoldPoint {
 public:
  ManifoldPoint() = default;
  ManifoldPoint(const MetricContext& ctx, Matrix x);
  /// Trusted constructor: `mx` must equal M * x.
  ManifoldPoint(Matrix x, Matrix mx);

  const Matrix& x() const { return x_; }
  const Matrix& mx() const { return mx_; }
  Index rows() const { return x_.rows(); }
  Index cols() const { return x_.cols(); }
  /// Identity shared by tangent vectors built at this point.
  std::uint64_t id() const { return id_; }

 private:
  Matrix x_;
  Matrix mx_;
  std::uint64_t id_ = 0;
};

/// Tangent vector Z at a base point, with MZ cached.
class TangentVector {
 public:
  TangentVector() = default;
  /// Trusted constructor: `mz` must equal M * z.
  TangentVector(Matrix z, Matrix mz, std::uint64_t base);

  const Matrix& z() const { return z_; }
  const Matrix& mz() const { return mz_; }
  std::uint64_t base() const { return base_; }

  TangentVector& operator*=(double s);
  /// this += s * other. Both must share a base point.
  TangentVector& add_scaled(double s, const TangentVector& other);

 private:
  Matrix z_;
  Matrix mz_;
  std::uint64_t base_ = 0;
};

TangentVector operator*(double s, TangentVector v);
TangentVector operator-(TangentVector v);

/// Zero tangent vector at `x`.
TangentVector zero_tangent(const ManifoldPoint& x);

/// tr(U^T M V).
double inner(const MetricContext& ctx, const Matrix& u, const Matrix& v);
/// sqrt(inner(U, U)).
double norm(const MetricContext& ctx, const Matrix& u);

/// Metric inner product from the cached images; no n^2 work. The base points
/// may differ since the metric does not depend on the point.
double inner(const TangentVector& a, const TangentVector& b);
double norm(const TangentVector& a);

/// N - X sym(X^T M N).
TangentVector project_tangent(const MetricContext& ctx, const ManifoldPoint& x,
                              const Matrix& n);
/// Same projection when M N is already known.
TangentVector project_tangent(const ManifoldPoint& x, const Matrix& n,
                              const Matrix& mn);

/// Riemannian gradient from the Euclidean one: project(M^{-1} eg), with one
/// solve and one product with M. The cached image is M applied to the result.
TangentVector egrad_to_rgrad(const MetricContext& ctx, const ManifoldPoint& x,
                             const Matrix& eg);

/// ||X^T M X - I_p||_F, accumulated in extended precision. In double the
/// measurement alone carries an error of order eps * cond(M), which for badly
/// conditioned metrics exceeds the 1e-13 tolerances it is compared against.
double check_feasibility(const MetricContext& ctx, const Matrix& x);
/// Cheap double-precision residual from the cached M X.
double check_feasibility(const ManifoldPoint& x);

/// ||sym(X^T M Z)||_F.
double tangency_residual(const ManifoldPoint& x, const Matrix& z);

/// Modified Gram-Schmidt in the M inner product with one reorthogonalization
/// pass. span(X) = span(A), diag(X^T M A) > 0. Throws DegeneracyError when a
/// pivot falls below 1e-12 ||A||_M.
ManifoldPoint m_orthonormalize(const MetricContext& ctx, const Matrix& a);

/// Two steps of X <- X (I - E/2 + 3E^2/8), E = X^T M X - I, in extended
/// precision: the polar normalization to third order. For nearly feasible X.
ManifoldPoint refine_feasibility(const MetricContext& ctx, const Matrix& x);

/// Restoration after drift: m_orthonormalize followed by refine_feasibility.
ManifoldPoint restore_feasibility(const MetricContext& ctx, const Matrix& x);

/// m_orthonormalize of a standard-normal n x p draw.
ManifoldPoint random_point(const MetricContext& ctx, Index p, Rng& rng);
/// Projection of a standard-normal draw, scaled to unit M-norm.
TangentVector random_tangent(const MetricContext& ctx, const ManifoldPoint& x,
                             Rng& rng);

}  // namespace gstiefel
