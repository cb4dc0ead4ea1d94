#include "gstiefel/manifold.hpp"

#include <atomic>
#include <cmath>

#include "gstiefel/kernels.hpp"

namespace gstiefel {

namespace {

std::atomic<std::uint64_t> g_next_point_id{1};

std::uint64_t next_point_id() {
  return g_next_point_id.fetch_add(1, std::memory_order_relaxed);
}

void require_rows(const MetricContext& ctx, const Matrix& a, const char* what) {
  if (a.rows() != ctx.dim())
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(ctx.dim()) + " rows, got " +
                         std::to_string(a.rows()));
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(what) + ": shape mismatch");
}

}  // namespace

MetricContext::MetricContext(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0)
    throw NumericError("metric matrix must be square and nonempty");
  const double scale = m_.norm();
  if (!std::isfinite(scale))
    throw NumericError("metric matrix has non-finite entries");
  if ((m_ - m_.transpose()).norm() > 1e-12 * scale)
    throw NumericError("metric matrix is not symmetric");
  llt_.compute(m_);
  if (llt_.info() != Eigen::Success)
    throw NumericError("metric matrix is not positive definite");
}

Matrix MetricContext::apply(const Matrix& b) const {
  require_rows(*this, b, "MetricContext::apply");
  return kernels::multiply(m_, b);
}

Matrix MetricContext::solve(const Matrix& b) const {
  require_rows(*this, b, "MetricContext::solve");
  Matrix out = llt_.solve(b);
  if (!out.allFinite()) throw NumericError("solve with M produced non-finite values");
  return out;
}

ManifoldPoint::ManifoldPoint(const MetricContext& ctx, Matrix x)
    : x_(std::move(x)), id_(next_point_id()) {
  require_rows(ctx, x_, "ManifoldPoint");
  mx_ = ctx.apply(x_);
}

ManifoldPoint::ManifoldPoint(Matrix x, Matrix mx)
    : x_(std::move(x)), mx_(std::move(mx)), id_(next_point_id()) {
  require_same_shape(x_, mx_, "ManifoldPoint");
}

TangentVector::TangentVector(Matrix z, Matrix mz, std::uint64_t base)
    : z_(std::move(z)), mz_(std::move(mz)), base_(base) {
  require_same_shape(z_, mz_, "TangentVector");
}

TangentVector& TangentVector::operator*=(double s) {
  z_ *= s;
  mz_ *= s;
  return *this;
}

TangentVector& TangentVector::add_scaled(double s, const TangentVector& other) {
  if (other.base_ != base_)
    throw DimensionError("add_scaled: tangent vectors live at different points");
  require_same_shape(z_, other.z_, "add_scaled");
  z_ += s * other.z_;
  mz_ += s * other.mz_;
  return *this;
}

TangentVector operator*(double s, TangentVector v) {
  v *= s;
  return v;
}

TangentVector operator-(TangentVector v) {
  v *= -1.0;
  return v;
}

TangentVector zero_tangent(const ManifoldPoint& x) {
  return TangentVector(Matrix::Zero(x.rows(), x.cols()),
                       Matrix::Zero(x.rows(), x.cols()), x.id());
}

double inner(const MetricContext& ctx, const Matrix& u, const Matrix& v) {
  require_rows(ctx, u, "inner");
  require_same_shape(u, v, "inner");
  return kernels::trace_inner(u, ctx.apply(v));
}

double norm(const MetricContext& ctx, const Matrix& u) {
  return std::sqrt(std::max(0.0, inner(ctx, u, u)));
}

double inner(const TangentVector& a, const TangentVector& b) {
  require_same_shape(a.z(), b.z(), "inner");
  return kernels::trace_inner(a.z(), b.mz());
}

double norm(const TangentVector& a) {
  return std::sqrt(std::max(0.0, inner(a, a)));
}

TangentVector project_tangent(const ManifoldPoint& x, const Matrix& n,
                              const Matrix& mn) {
  require_same_shape(x.x(), n, "project_tangent");
  require_same_shape(n, mn, "project_tangent");
  const Matrix s = sym(kernels::transpose_multiply(x.mx(), n));
  Matrix z = n - x.x() * s;
  Matrix mz = mn - x.mx() * s;
  return TangentVector(std::move(z), std::move(mz), x.id());
}

TangentVector project_tangent(const MetricContext& ctx, const ManifoldPoint& x,
                              const Matrix& n) {
  require_rows(ctx, n, "project_tangent");
  return project_tangent(x, n, ctx.apply(n));
}

TangentVector egrad_to_rgrad(const MetricContext& ctx, const ManifoldPoint& x,
                             const Matrix& eg) {
  require_rows(ctx, eg, "egrad_to_rgrad");
  const Matrix g_tilde = ctx.solve(eg);
  // Near a critical point the projection cancels almost all of M^{-1} eg.
  // Forming M grad from the projected result, rather than by the same
  // cancellation on eg, keeps the cached image consistent with grad, so that
  // inner products involving it obey Cauchy-Schwarz to rounding.
  Matrix z = project_tangent(x, g_tilde, eg).z();
  Matrix mz = ctx.apply(z);
  return TangentVector(std::move(z), std::move(mz), x.id());
}

namespace {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// M X with extended-precision accumulation, column by column so that M is
// never copied.
LMatrix extended_apply(const Matrix& m, const LMatrix& x) {
  const Index n = m.rows();
  LMatrix out = LMatrix::Zero(n, x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    for (Index k = 0; k < n; ++k) {
      const long double xk = x(k, j);
      if (xk == 0.0L) continue;
      for (Index i = 0; i < n; ++i) out(i, j) += static_cast<long double>(m(i, k)) * xk;
    }
  return out;
}

LMatrix extended_defect(const Matrix& m, const LMatrix& x) {
  LMatrix e = x.transpose() * extended_apply(m, x);
  e.diagonal().array() -= 1.0L;
  return 0.5L * (e + e.transpose());
}

}  // namespace

double check_feasibility(const MetricContext& ctx, const Matrix& x) {
  require_rows(ctx, x, "check_feasibility");
  return static_cast<double>(extended_defect(ctx.matrix(), x.cast<long double>()).norm());
}

ManifoldPoint refine_feasibility(const MetricContext& ctx, const Matrix& x) {
  require_rows(ctx, x, "refine_feasibility");
  LMatrix xl = x.cast<long double>();
  for (int it = 0; it < 2; ++it) {
    // X (X^T M X)^{-1/2} ~ X (I - E/2 + 3E^2/8)
    const LMatrix e = extended_defect(ctx.matrix(), xl);
    xl = xl - 0.5L * (xl * e) + 0.375L * (xl * (e * e));
  }
  return ManifoldPoint(ctx, xl.cast<double>());
}

ManifoldPoint restore_feasibility(const MetricContext& ctx, const Matrix& x) {
  return refine_feasibility(ctx, m_orthonormalize(ctx, x).x());
}

double check_feasibility(const ManifoldPoint& x) {
  const Matrix gram = kernels::transpose_multiply(x.x(), x.mx());
  return (gram - Matrix::Identity(x.cols(), x.cols())).norm();
}

double tangency_residual(const ManifoldPoint& x, const Matrix& z) {
  require_same_shape(x.x(), z, "tangency_residual");
  return sym(kernels::transpose_multiply(x.mx(), z)).norm();
}

ManifoldPoint m_orthonormalize(const MetricContext& ctx, const Matrix& a) {
  require_rows(ctx, a, "m_orthonormalize");
  const Index n = a.rows();
  const Index p = a.cols();
  const double scale = norm(ctx, a);
  if (!(scale > 0.0)) throw DegeneracyError("m_orthonormalize: zero input");

  Matrix q(n, p);
  Matrix mq(n, p);
  for (Index j = 0; j < p; ++j) {
    Vector v = a.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) {
        const double r = mq.col(i).dot(v);
        v -= r * q.col(i);
      }
    }
    Vector mv = ctx.matrix() * v;
    const double pivot = std::sqrt(std::max(0.0, v.dot(mv)));
    if (!(pivot >= 1e-12 * scale))
      throw DegeneracyError("m_orthonormalize: rank-deficient input (column " +
                            std::to_string(j) + ")");
    q.col(j) = v / pivot;
    mq.col(j) = mv / pivot;
  }
  return ManifoldPoint(std::move(q), std::move(mq));
}

ManifoldPoint random_point(const MetricContext& ctx, Index p, Rng& rng) {
  if (p < 1 || p > ctx.dim())
    throw DimensionError("random_point: need 1 <= p <= n");
  try {
    return m_orthonormalize(ctx, gaussian_matrix(ctx.dim(), p, rng));
  } catch (const DegeneracyError&) {
    return m_orthonormalize(ctx, gaussian_matrix(ctx.dim(), p, rng));
  }
}

TangentVector random_tangent(const MetricContext& ctx, const ManifoldPoint& x,
                             Rng& rng) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    TangentVector z =
        project_tangent(ctx, x, gaussian_matrix(x.rows(), x.cols(), rng));
    const double nz = norm(z);
    if (nz > 0.0) {
      z *= 1.0 / nz;
      return z;
    }
  }
  throw DegeneracyError("random_tangent: degenerate draw");
}

}  // namespace gstiefel
