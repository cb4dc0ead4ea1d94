#include "gstiefel/product.hpp"

#include <cmath>

namespace gstiefel {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(want) +
                         " components, got " + std::to_string(got));
}

}  // namespace

ProductManifold::ProductManifold(std::vector<MetricPtr> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw DimensionError("ProductManifold: no factors");
  for (const MetricPtr& f : factors_)
    if (!f) throw DimensionError("ProductManifold: null factor");
}

ProductPoint ProductManifold::make_point(std::span<const Matrix> xs) const {
  require_size(xs.size(), size(), "make_point");
  ProductPoint out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.emplace_back(factor(i), xs[i]);
  return out;
}

std::vector<Matrix> raw_matrices(const ProductPoint& x) {
  std::vector<Matrix> out;
  out.reserve(x.size());
  for (const ManifoldPoint& c : x) out.push_back(c.x());
  return out;
}

double inner(const ProductTangent& a, const ProductTangent& b) {
  require_size(b.size(), a.size(), "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

double norm(const ProductTangent& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

ProductTangent egrad_to_rgrad(const ProductManifold& mf, const ProductPoint& x,
                              std::span<const Matrix> eg) {
  require_size(x.size(), mf.size(), "egrad_to_rgrad");
  require_size(eg.size(), mf.size(), "egrad_to_rgrad");
  ProductTangent out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.push_back(egrad_to_rgrad(mf.factor(i), x[i], eg[i]));
  return out;
}

ProductTangent project_tangent(const ProductManifold& mf, const ProductPoint& x,
                               std::span<const Matrix> n) {
  require_size(x.size(), mf.size(), "project_tangent");
  require_size(n.size(), mf.size(), "project_tangent");
  ProductTangent out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.push_back(project_tangent(mf.factor(i), x[i], n[i]));
  return out;
}

double check_feasibility(const ProductPoint& x) {
  double worst = 0.0;
  for (const ManifoldPoint& c : x) worst = std::max(worst, check_feasibility(c));
  return worst;
}

double check_feasibility(const ProductManifold& mf, const ProductPoint& x) {
  require_size(x.size(), mf.size(), "check_feasibility");
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, check_feasibility(mf.factor(i), x[i].x()));
  return worst;
}

ProductTangent scaled(double s, ProductTangent v) {
  for (TangentVector& c : v) c *= s;
  return v;
}

ProductTangent combine(double a, const ProductTangent& u, double b,
                       const ProductTangent& v) {
  require_size(v.size(), u.size(), "combine");
  ProductTangent out = scaled(a, u);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].add_scaled(b, v[i]);
  return out;
}

ProductPoint random_point(const ProductManifold& mf, Index p, Rng& rng) {
  ProductPoint out;
  out.reserve(mf.size());
  for (std::size_t i = 0; i < mf.size(); ++i)
    out.push_back(random_point(mf.factor(i), p, rng));
  return out;
}

ProductTangent random_tangent(const ProductManifold& mf, const ProductPoint& x,
                              Rng& rng) {
  require_size(x.size(), mf.size(), "random_tangent");
  ProductTangent out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.push_back(random_tangent(mf.factor(i), x[i], rng));
  const double nz = norm(out);
  return scaled(1.0 / nz, std::move(out));
}

}  // namespace gstiefel
