#pragma once

// Riemannian non-monotone conjugate gradient on (products of) generalized
// Stiefel manifolds.
//
//   Z_0 = -grad f(X_0)
//   while ||grad f(X_k)|| > epsilon and k < K:
//     t_k = tbar_k sigma^h, smallest h >= 0 with
//       f(R(t_k Z_k)) <= max{f(X_k), ..., f(X_{k-min(q-1,k)})}
//                        + delta t_k <grad f(X_k), Z_k>
//     X_{k+1} = R_{X_k}(t_k Z_k)
//     Z_{k+1} = -grad f(X_{k+1}) + beta_{k+1} T_{t_k Z_k}(Z_k)
//     tbar_{k+1} = clamp(<S,S> / |<Y,S>|, t_min, t_max)
//
// with the modified-PRP beta, S = t_k Z_k and
// Y = grad f(X_{k+1}) - T_{t_k Z_k}(grad f(X_k)).

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gstiefel/cayley.hpp"
#include "gstiefel/product.hpp"

namespace gstiefel {

enum class TransportKind {
  DiffRetraction,  ///< differentiated Cayley retraction
  Isometric,       ///< Cayley approximation of the differentiated exponential
  Projection,      ///< project onto the new tangent space
};

enum class RetractionKind { Cayley, CholQR, Polar };

struct SolverParams {
  double epsilon = 1e-6;    ///< gradient-norm tolerance
  double epsilon_c = 1e-13; ///< feasibility tolerance before restoration
  double delta = 1e-4;      ///< sufficient-decrease constant
  int q = 2;                ///< non-monotone window length
  double sigma = 0.2;       ///< backtracking factor
  double t0 = 1e-3;         ///< first trial step
  double t_min = 1e-20;
  double t_max = 1.0;
  int max_iterations = 1000;
  int max_backtracks = 50;
  TransportKind transport = TransportKind::DiffRetraction;
  RetractionKind retraction = RetractionKind::Cayley;
  RetractionStrategy strategy = RetractionStrategy::Auto;

  /// Throws std::invalid_argument on out-of-range values or a Cayley-based
  /// transport paired with a non-Cayley retraction.
  void validate() const;
};

/// Objective over a product of generalized Stiefel factors, minimized.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual const ProductManifold& manifold() const = 0;
  virtual double objective(std::span<const Matrix> x) const = 0;
  virtual std::vector<Matrix> euclidean_gradient(std::span<const Matrix> x) const = 0;

  /// f(to) - f(from). Near convergence this difference is far below the
  /// rounding error of f itself, so problems should override it with a form
  /// built on to - from (exact in floating point for nearby points).
  virtual double objective_difference(std::span<const Matrix> from,
                                      std::span<const Matrix> to) const {
    return objective(to) - objective(from);
  }

  /// Value shown in reports; problems that maximize flip the sign back.
  virtual double reported_objective(double f) const { return f; }
};

/// One accepted step. All objective quantities that enter the acceptance test
/// are kept relative to f(X_k):
///   slope         = <grad f(X_k), Z_k>
///   window_offset = max{f(X_j) : j in window} - f(X_k)  (>= 0)
///   delta         = f(X_{k+1}) - f(X_k)
/// and the step was accepted because delta <= window_offset + delta t slope.
struct IterationRecord {
  int k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double t = 0.0;
  double beta = 0.0;  ///< beta_{k+1} used to form Z_{k+1}
  int nfe = 0;
  double slope = 0.0;
  double window_offset = 0.0;
  double delta = 0.0;
  bool restarted = false;  ///< Z_k was reset to -grad f(X_k)
};

struct SolveResult {
  ProductPoint x;
  double obj = 0.0;
  double grad_norm = 0.0;
  double initial_grad_norm = 0.0;
  double rel_grad_norm = 0.0;  ///< grad_norm / initial_grad_norm
  int iterations = 0;
  int nfe = 0;
  double wall_time = 0.0;
  double feasibility = 0.0;
  bool converged = false;
  bool restored = false;
  std::string stop_reason;
  std::vector<double> obj_history;
  std::vector<double> grad_history;
  std::vector<IterationRecord> trace;
};

/// The backtracking loop ran out of trials. Carries the best trial seen.
class LineSearchError : public Error {
 public:
  LineSearchError(int nfe, double best_t, double best_f)
      : Error("non-monotone line search failed"),
        nfe_(nfe), best_t_(best_t), best_f_(best_f) {}
  int nfe() const { return nfe_; }
  double best_t() const { return best_t_; }
  double best_f() const { return best_f_; }

 private:
  int nfe_;
  double best_t_;
  double best_f_;
};

/// (a^2 - (a/b)|c|) / b^2 with a = ||g_+||, b = ||g||, c = <g_+, T(g)>.
/// Throws DegeneracyError if b = 0.
double beta_mprp(double g_new_norm, double g_old_norm, double cross);
double beta_mprp(const ProductTangent& g_new, double g_old_norm,
                 const ProductTangent& transported_g_old);

/// clamp(<S,S> / |<Y,S>|, t_min, t_max); t_max when |<Y,S>| <= 1e-30 <S,S>.
double bb_initial_step(double s_dot_s, double y_dot_s, const SolverParams& params);
double bb_initial_step(const ProductTangent& s, const ProductTangent& y_diff,
                       const SolverParams& params);
double bb_initial_step(const MetricContext& ctx, const Matrix& s,
                       const Matrix& y_diff, const SolverParams& params);

/// Trial point R_X(tZ) for every factor, plus the factored Cayley systems
/// when the retraction is Cayley (reused by the transports).
struct TrialStep {
  double t = 0.0;
  std::vector<Matrix> x;
  std::vector<std::optional<CayleyStep>> cayley;
};

TrialStep retract_trial(const ProductManifold& mf, const ProductPoint& x,
                        const ProductTangent& z, double t,
                        const SolverParams& params);

/// Transport of the step direction itself / of a general tangent Y at X,
/// along the trial step, to the accepted point `at`.
ProductTangent transport_direction(const TrialStep& step, const ProductTangent& z,
                                   const ProductPoint& at,
                                   const SolverParams& params);
ProductTangent transport_vector(const TrialStep& step, const ProductTangent& y,
                                const ProductPoint& at, const SolverParams& params);

struct LineSearchResult {
  TrialStep step;
  double delta = 0.0;  ///< f(X_new) - f(X)
  int nfe = 0;
};

/// Backtracking from t_init by factors of sigma until
///   f(R_X(tZ)) - f(X) <= max(f_window) + delta t slope.
/// `f_window` holds the recent objective values relative to f(X), so its last
/// entry is 0. Every trial costs one objective evaluation; a singular Cayley
/// system counts as a rejected trial. `slope` = <grad f(X), Z> must be
/// negative. `best_f` of a LineSearchError is likewise relative to f(X).
LineSearchResult line_search_nonmonotone(const Problem& problem,
                                         const ProductPoint& x,
                                         const ProductTangent& z,
                                         std::span<const double> f_window,
                                         double t_init, double slope,
                                         const SolverParams& params);

SolveResult solve(const Problem& problem, const ProductPoint& x0,
                  const SolverParams& params);

}  // namespace gstiefel
