#pragma once

// Cayley-transform retraction on St_M(n,p) and the two vector transports
// built on it.
//
// With P_X = I - 1/2 X X^T M, the skew matrix W_Z = P_X Z X^T - X Z^T P_X^T
// factors as U V^T with U = [P_X Z, X] and V = [X, -P_X Z] (both n x 2p), and
// Z = W_Z M X for tangent Z. The retraction is
//
//   R_X(tZ) = (I - t/2 W_Z M)^{-1} (I + t/2 W_Z M) X,
//
// which the Sherman-Morrison-Woodbury identity turns into
//
//   R_X(tZ) = X + t U (I - t/2 V^T M U)^{-1} V^T M X,
//
// so a step costs O(n p^2) once MX and MZ are known. Both transports get the
// same treatment; every operation has a dense n x n path kept for small
// problems and for cross-checking.

#include <optional>

#include "gstiefel/manifold.hpp"

namespace gstiefel {

enum class RetractionStrategy { Full, LowRank, Auto };

/// Auto picks the low-rank path when 4p <= n.
bool uses_low_rank(RetractionStrategy strategy, Index n, Index p);

/// W_Z = U V^T, with the images MU, MV kept alongside.
struct SkewFactors {
  Matrix u;
  Matrix v;
  Matrix mu;
  Matrix mv;

  /// The n x n matrix U V^T. Only for tests and small diagnostics.
  Matrix dense() const { return u * v.transpose(); }
};

SkewFactors skew_factors(const ManifoldPoint& x, const TangentVector& z);

/// Everything that depends on (X, Z, t) alone, factored once and shared by the
/// retraction and both transports of one solver step.
class CayleyStep {
 public:
  /// Throws StepTooLargeError if the 2p x 2p (or n x n) Cayley system is
  /// numerically singular. `ctx` must outlive the step.
  CayleyStep(const MetricContext& ctx, const ManifoldPoint& x,
             const TangentVector& z, double t, RetractionStrategy strategy);

  bool low_rank() const { return low_rank_; }
  double t() const { return t_; }
  const SkewFactors& factors() const { return factors_; }

  /// R_X(tZ) as a raw matrix.
  const Matrix& point() const { return point_; }
  /// R_X(tZ) with M X(t) formed from scratch.
  ManifoldPoint retracted_point() const;

  /// Differentiated retraction applied to the direction itself:
  /// (I - t/2 W_Z M)^{-2} Z. `at` is R_X(tZ).
  TangentVector transport_diff_direction(const ManifoldPoint& at) const;
  /// Differentiated retraction for a general tangent Y at X:
  /// (I - t/2 W_Z M)^{-1} W_Y M (I - t/2 W_Z M)^{-1} X.
  TangentVector transport_diff(const TangentVector& y,
                               const ManifoldPoint& at) const;

  /// Isometric transport of the direction: W_Z M X(t).
  TangentVector transport_iso_direction(const ManifoldPoint& at) const;
  /// Isometric transport (I - t/2 W_Z M)^{-1} (I + t/2 W_Z M) Y.
  TangentVector transport_iso(const TangentVector& y,
                              const ManifoldPoint& at) const;

 private:
  TangentVector make_tangent(Matrix z, Matrix mz, const ManifoldPoint& at) const;
  TangentVector make_tangent(Matrix z, const ManifoldPoint& at) const;
  void check_base(const TangentVector& y) const;

  const MetricContext* ctx_;
  Matrix x_;
  Matrix mx_;
  std::uint64_t base_;
  TangentVector z_;
  double t_;
  bool low_rank_;
  SkewFactors factors_;

  // Low-rank path: M1 = V^T M X, M2 = V^T M U, K = I - t/2 M2, M3 = K^{-1} M1.
  Matrix m1_, m2_, m3_;
  Eigen::PartialPivLU<Matrix> small_lu_;

  // Dense path: LU of I - t/2 W_Z M, and I + t/2 W_Z M.
  Eigen::PartialPivLU<Matrix> dense_lu_;
  Matrix dense_plus_;

  Matrix point_;
};

ManifoldPoint retract(const MetricContext& ctx, const ManifoldPoint& x,
                      const TangentVector& z, double t,
                      RetractionStrategy strategy = RetractionStrategy::Auto);

/// Transport of Y along tZ by the differentiated retraction. Returned vector
/// is tangent at R_X(tZ).
TangentVector transport_diff(const MetricContext& ctx, const ManifoldPoint& x,
                             const TangentVector& z, double t,
                             const TangentVector& y,
                             RetractionStrategy strategy = RetractionStrategy::Auto);
/// Same with Y = Z, via the M1/M2/M3 closed form on the low-rank path.
TangentVector transport_diff_direction(
    const MetricContext& ctx, const ManifoldPoint& x, const TangentVector& z,
    double t, RetractionStrategy strategy = RetractionStrategy::Auto);

TangentVector transport_iso(const MetricContext& ctx, const ManifoldPoint& x,
                            const TangentVector& z, double t,
                            const TangentVector& y,
                            RetractionStrategy strategy = RetractionStrategy::Auto);
TangentVector transport_iso_direction(
    const MetricContext& ctx, const ManifoldPoint& x, const TangentVector& z,
    double t, RetractionStrategy strategy = RetractionStrategy::Auto);

struct AngleBound {
  double cos_theta = 0.0;
  double lower_bound = 0.0;
};

/// Metric cosine between the two transports of Z along tZ, and the analytic
/// lower bound sqrt((4 + t^2 b1^2 g1^2) / (4 + t^2 bn^2 gn^2)), where g are
/// the extreme eigenvalues of M and b the extreme imaginary parts of the
/// eigenvalues of W_Z. Dense eigensolvers; limited to n <= 500.
AngleBound angle_bound(const MetricContext& ctx, const ManifoldPoint& x,
                       const TangentVector& z, double t);

}  // namespace gstiefel
