#pragma once

// Benchmark problems.
//
//   GEVP: max tr(X^T A X)  s.t.  X^T M X = I_p
//   CCA:  min -tr(U^T Cxy V N)  s.t.  U^T Cx U = I_p, V^T Cy V = I_p
//
// Both are written as minimizations; GEVP reports the positive trace. Each
// comes with a dense oracle for its optimum and a seeded generator.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "gstiefel/solver.hpp"

namespace gstiefel {

enum class GevpKind { DiagA, RandomA, User };

std::string to_string(GevpKind kind);
/// Accepts "diag", "random", "user" (and the enum spellings).
GevpKind parse_gevp_kind(const std::string& s);

struct GevpInstance {
  Matrix a;
  Matrix m;
  Index p = 0;
  GevpKind kind = GevpKind::User;
  std::uint64_t seed = 0;

  /// Throws on shape mismatch, asymmetric A, or p outside [1, n].
  void validate() const;
};

struct CcaInstance {
  Matrix cx;
  Matrix cy;
  Matrix cxy;
  Vector mu;  ///< diagonal of N, strictly decreasing and positive
  std::uint64_t seed = 0;

  Index p() const { return mu.size(); }
  void validate() const;
};

class GevpProblem : public Problem {
 public:
  explicit GevpProblem(const GevpInstance& inst);

  const ProductManifold& manifold() const override { return manifold_; }
  const MetricContext& metric() const { return *manifold_.factors().front(); }
  double objective(std::span<const Matrix> x) const override;
  std::vector<Matrix> euclidean_gradient(std::span<const Matrix> x) const override;
  /// -tr(D^T A (X + Y)), D = Y - X.
  double objective_difference(std::span<const Matrix> from,
                              std::span<const Matrix> to) const override;
  double reported_objective(double f) const override { return -f; }

 private:
  Matrix apply_a(const Matrix& x) const;

  ProductManifold manifold_;
  Matrix a_;
  std::optional<Vector> diag_;  // set when A is diagonal
};

class CcaProblem : public Problem {
 public:
  explicit CcaProblem(const CcaInstance& inst);

  const ProductManifold& manifold() const override { return manifold_; }
  double objective(std::span<const Matrix> x) const override;
  std::vector<Matrix> euclidean_gradient(std::span<const Matrix> x) const override;
  /// -tr((D_U^T Cxy V' + U^T Cxy D_V) N), D_U = U' - U, D_V = V' - V.
  double objective_difference(std::span<const Matrix> from,
                              std::span<const Matrix> to) const override;

 private:
  ProductManifold manifold_;
  Matrix cxy_;
  Vector mu_;
};

std::unique_ptr<GevpProblem> gevp_problem(const GevpInstance& inst);
std::unique_ptr<CcaProblem> cca_problem(const CcaInstance& inst);

/// -(sum of the p largest eigenvalues of the pencil (A, M)), by reduction
/// with the Cholesky factor of M.
double gevp_oracle(const GevpInstance& inst);
/// -sum_i mu_i sigma_i, sigma the top singular values of
/// Lx^{-1} Cxy Ly^{-T} (Cx = Lx Lx^T, Cy = Ly Ly^T).
double cca_oracle(const CcaInstance& inst);

/// DiagA: A = diag(1..n). RandomA: A = D^T D with D n x n standard normal.
/// M = Y^T Y / s + I_n with Y s x n standard normal.
GevpInstance generate_gevp_instance(GevpKind kind, Index n, Index p,
                                    std::uint64_t seed, Index s = 1000);

/// mu_i = 1 + 0.1 (p - i + 1), i = 1..p: (1 + 0.1p, ..., 1.2, 1.1).
Vector default_cca_weights(Index p);

/// Cx = X0^T X0 / T, Cy = Y0^T Y0 / T, Cxy = X0^T Y0 / T with X0 (T x m) and
/// Y0 (T x n) standard normal. Throws NumericError if Cx or Cy is singular.
CcaInstance generate_cca_instance(Index m, Index n, Index p, Index samples,
                                  std::uint64_t seed,
                                  std::optional<Vector> mu = std::nullopt);

/// Bundles: A.mtx/M.mtx (GEVP) or Cx.mtx/Cy.mtx/Cxy.mtx (CCA) plus
/// manifest.json in `dir`.
void save_instance(const std::filesystem::path& dir, const GevpInstance& inst);
void save_instance(const std::filesystem::path& dir, const CcaInstance& inst);
GevpInstance load_gevp_instance(const std::filesystem::path& dir);
CcaInstance load_cca_instance(const std::filesystem::path& dir);

}  // namespace gstiefel
