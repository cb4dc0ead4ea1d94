#pragma once

// Products St_{M_1}(n_1,p) x ... x St_{M_k}(n_k,p). The metric is the sum of
// the factor metrics and every geometric operation acts componentwise. A
// single generalized Stiefel manifold is the k = 1 case, so the solver only
// ever sees products.

#include <span>
#include <vector>

#include "gstiefel/manifold.hpp"

namespace gstiefel {

using ProductPoint = std::vector<ManifoldPoint>;
using ProductTangent = std::vector<TangentVector>;

class ProductManifold {
 public:
  ProductManifold() = default;
  explicit ProductManifold(std::vector<MetricPtr> factors);

  std::size_t size() const { return factors_.size(); }
  const MetricContext& factor(std::size_t i) const { return *factors_.at(i); }
  const std::vector<MetricPtr>& factors() const { return factors_; }

  /// Wraps raw component matrices, forming M_i X_i for each.
  ProductPoint make_point(std::span<const Matrix> xs) const;

 private:
  std::vector<MetricPtr> factors_;
};

std::vector<Matrix> raw_matrices(const ProductPoint& x);

double inner(const ProductTangent& a, const ProductTangent& b);
double norm(const ProductTangent& a);

ProductTangent egrad_to_rgrad(const ProductManifold& mf, const ProductPoint& x,
                              std::span<const Matrix> eg);
ProductTangent project_tangent(const ProductManifold& mf, const ProductPoint& x,
                               std::span<const Matrix> n);

/// Largest factor feasibility residual (cached, double precision).
double check_feasibility(const ProductPoint& x);
/// Largest factor feasibility residual in extended precision.
double check_feasibility(const ProductManifold& mf, const ProductPoint& x);

ProductTangent scaled(double s, ProductTangent v);
/// a * u + b * v, componentwise; u and v must share base points.
ProductTangent combine(double a, const ProductTangent& u, double b,
                       const ProductTangent& v);

ProductPoint random_point(const ProductManifold& mf, Index p, Rng& rng);
ProductTangent random_tangent(const ProductManifold& mf, const ProductPoint& x,
                              Rng& rng);

}  // namespace gstiefel
