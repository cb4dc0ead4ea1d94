#pragma once

// Retractions used by the comparison variants: Cholesky-QR and polar
// normalization of X + tZ in the M inner product.

#include "gstiefel/manifold.hpp"

namespace gstiefel {

enum class BaselineKind { CholQR, Polar };

/// CholQR: (X + tZ) L^{-T}, L L^T = (X + tZ)^T M (X + tZ).
/// Polar:  (X + tZ) ((X + tZ)^T M (X + tZ))^{-1/2}.
/// The Gram matrix is formed as I + 2t sym(X^T M Z) + t^2 Z^T M Z, i.e. with
/// X assumed feasible. Throws StepTooLargeError when it is not numerically SPD.
ManifoldPoint baseline_retraction(BaselineKind kind, const MetricContext& ctx,
                                  const ManifoldPoint& x, const TangentVector& z,
                                  double t);

/// Same as a raw matrix, using the cached MX and MZ (O(n p^2)).
Matrix baseline_retract_raw(BaselineKind kind, const ManifoldPoint& x,
                            const TangentVector& z, double t);

}  // namespace gstiefel
