#include "gstiefel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gstiefel/baselines.hpp"
#include "gstiefel/kernels.hpp"

namespace gstiefel {

void SolverParams::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (!(epsilon_c > 0.0)) fail("epsilon_c must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (q < 1) fail("q must be at least 1");
  if (!(sigma > 0.0 && sigma < 1.0)) fail("sigma must lie in (0, 1)");
  if (!(t_min > 0.0)) fail("t_min must be positive");
  if (!(t_max >= t_min)) fail("t_max must be >= t_min");
  if (!(t0 > 0.0) || !std::isfinite(t0)) fail("t0 must be positive");
  if (max_iterations < 0) fail("max_iterations must be non-negative");
  if (max_backtracks < 0) fail("max_backtracks must be non-negative");
  if (retraction != RetractionKind::Cayley && transport != TransportKind::Projection)
    fail("Cayley-based transports require the Cayley retraction");
}

double beta_mprp(double g_new_norm, double g_old_norm, double cross) {
  if (!(g_old_norm > 0.0)) throw DegeneracyError("beta_mprp: zero previous gradient");
  const double a = g_new_norm;
  const double b = g_old_norm;
  return (a * a - (a / b) * std::abs(cross)) / (b * b);
}

double beta_mprp(const ProductTangent& g_new, double g_old_norm,
                 const ProductTangent& transported_g_old) {
  return beta_mprp(norm(g_new), g_old_norm, inner(g_new, transported_g_old));
}

double bb_initial_step(double s_dot_s, double y_dot_s, const SolverParams& params) {
  const double den = std::abs(y_dot_s);
  if (!(den > 1e-30 * s_dot_s) || !std::isfinite(s_dot_s)) return params.t_max;
  return std::clamp(s_dot_s / den, params.t_min, params.t_max);
}

double bb_initial_step(const ProductTangent& s, const ProductTangent& y_diff,
                       const SolverParams& params) {
  return bb_initial_step(inner(s, s), inner(y_diff, s), params);
}

double bb_initial_step(const MetricContext& ctx, const Matrix& s,
                       const Matrix& y_diff, const SolverParams& params) {
  const Matrix ms = ctx.apply(s);
  return bb_initial_step(kernels::trace_inner(s, ms), kernels::trace_inner(y_diff, ms),
                         params);
}

TrialStep retract_trial(const ProductManifold& mf, const ProductPoint& x,
                        const ProductTangent& z, double t,
                        const SolverParams& params) {
  if (x.size() != mf.size() || z.size() != mf.size())
    throw DimensionError("retract_trial: component count mismatch");
  TrialStep out;
  out.t = t;
  out.x.resize(x.size());
  out.cayley.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (params.retraction) {
      case RetractionKind::Cayley:
        out.cayley[i].emplace(mf.factor(i), x[i], z[i], t, params.strategy);
        out.x[i] = out.cayley[i]->point();
        break;
      case RetractionKind::CholQR:
        out.x[i] = baseline_retract_raw(BaselineKind::CholQR, x[i], z[i], t);
        break;
      case RetractionKind::Polar:
        out.x[i] = baseline_retract_raw(BaselineKind::Polar, x[i], z[i], t);
        break;
    }
  }
  return out;
}

ProductTangent transport_direction(const TrialStep& step, const ProductTangent& z,
                                   const ProductPoint& at,
                                   const SolverParams& params) {
  ProductTangent out;
  out.reserve(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    switch (params.transport) {
      case TransportKind::DiffRetraction:
        out.push_back(step.cayley.at(i)->transport_diff_direction(at[i]));
        break;
      case TransportKind::Isometric:
        out.push_back(step.cayley.at(i)->transport_iso_direction(at[i]));
        break;
      case TransportKind::Projection:
        out.push_back(project_tangent(at[i], z[i].z(), z[i].mz()));
        break;
    }
  }
  return out;
}

ProductTangent transport_vector(const TrialStep& step, const ProductTangent& y,
                                const ProductPoint& at, const SolverParams& params) {
  ProductTangent out;
  out.reserve(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    switch (params.transport) {
      case TransportKind::DiffRetraction:
        out.push_back(step.cayley.at(i)->transport_diff(y[i], at[i]));
        break;
      case TransportKind::Isometric:
        out.push_back(step.cayley.at(i)->transport_iso(y[i], at[i]));
        break;
      case TransportKind::Projection:
        out.push_back(project_tangent(at[i], y[i].z(), y[i].mz()));
        break;
    }
  }
  return out;
}

LineSearchResult line_search_nonmonotone(const Problem& problem,
                                         const ProductPoint& x,
                                         const ProductTangent& z,
                                         std::span<const double> f_window,
                                         double t_init, double slope,
                                         const SolverParams& params) {
  if (f_window.empty()) throw DimensionError("line_search: empty window");
  if (!(slope < 0.0)) throw DegeneracyError("line_search: not a descent direction");
  const double f_ref = *std::max_element(f_window.begin(), f_window.end());
  const std::vector<Matrix> from = raw_matrices(x);

  double best_t = 0.0;
  double best_delta = std::numeric_limits<double>::infinity();
  double t = t_init;
  int nfe = 0;
  for (int h = 0; h <= params.max_backtracks; ++h, t *= params.sigma) {
    ++nfe;
    TrialStep step;
    try {
      step = retract_trial(problem.manifold(), x, z, t, params);
    } catch (const StepTooLargeError&) {
      continue;
    }
    const double delta = problem.objective_difference(from, step.x);
    if (std::isfinite(delta) && delta <= f_ref + params.delta * t * slope)
      return LineSearchResult{std::move(step), delta, nfe};
    if (delta < best_delta) {
      best_delta = delta;
      best_t = t;
    }
  }
  throw LineSearchError(nfe, best_t, best_delta);
}

namespace {

constexpr int kMaxRestorations = 3;

struct Iterate {
  ProductPoint x;
  double f = 0.0;
  ProductTangent g;
  double gnorm = 0.0;
};

ProductTangent riemannian_gradient(const Problem& problem, const ProductPoint& x) {
  return egrad_to_rgrad(problem.manifold(), x,
                        problem.euclidean_gradient(raw_matrices(x)));
}

Iterate evaluate(const Problem& problem, ProductPoint x) {
  Iterate it;
  it.f = problem.objective(raw_matrices(x));
  it.g = riemannian_gradient(problem, x);
  it.gnorm = norm(it.g);
  it.x = std::move(x);
  return it;
}

// Window values relative to the newest one, built from the accepted
// differences so that no rounding error of f itself enters.
std::vector<double> window_offsets(const std::vector<double>& deltas, int q) {
  const std::size_t len = std::min<std::size_t>(q, deltas.size() + 1);
  std::vector<double> w(len, 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < len; ++i) {
    acc -= deltas[deltas.size() - i];
    w[len - 1 - i] = acc;
  }
  return w;
}

}  // namespace

SolveResult solve(const Problem& problem, const ProductPoint& x0,
                  const SolverParams& params) {
  params.validate();
  const auto start = std::chrono::steady_clock::now();
  const ProductManifold& mf = problem.manifold();
  if (x0.size() != mf.size()) throw DimensionError("solve: component count mismatch");

  SolveResult res;
  Iterate cur = evaluate(problem, x0);
  int nfe = 1;
  res.initial_grad_norm = cur.gnorm;
  res.obj_history.push_back(cur.f);
  res.grad_history.push_back(cur.gnorm);

  ProductTangent z = scaled(-1.0, cur.g);
  std::vector<double> deltas;  // accepted f differences since the last restoration
  double t_init = params.t0;
  int k = 0;
  int restorations = 0;
  bool failed = false;

  for (;;) {
    while (cur.gnorm > params.epsilon && k < params.max_iterations) {
      bool restarted = false;
      double slope = inner(cur.g, z);
      if (!(slope < -1e-12 * cur.gnorm * norm(z))) {
        z = scaled(-1.0, cur.g);
        slope = -cur.gnorm * cur.gnorm;
        restarted = true;
      }

      const std::vector<double> window = window_offsets(deltas, params.q);
      const double window_offset = *std::max_element(window.begin(), window.end());

      std::optional<LineSearchResult> ls;
      try {
        ls.emplace(line_search_nonmonotone(problem, cur.x, z, window, t_init, slope,
                                           params));
      } catch (const LineSearchError& e) {
        nfe += e.nfe();
        if (!restarted && k > 0) {
          // Retry once along steepest descent.
          z = scaled(-1.0, cur.g);
          slope = -cur.gnorm * cur.gnorm;
          restarted = true;
          try {
            ls.emplace(line_search_nonmonotone(problem, cur.x, z, window, t_init,
                                               slope, params));
          } catch (const LineSearchError& e2) {
            nfe += e2.nfe();
          }
        }
      }
      if (!ls) {
        failed = true;
        res.stop_reason = "line search failed";
        break;
      }
      nfe += ls->nfe;

      const double t = ls->step.t;
      Iterate next;
      next.x = mf.make_point(ls->step.x);
      next.f = cur.f + ls->delta;
      next.g = riemannian_gradient(problem, next.x);
      next.gnorm = norm(next.g);

      const ProductTangent tz = transport_direction(ls->step, z, next.x, params);
      const ProductTangent tg = transport_vector(ls->step, cur.g, next.x, params);
      const double beta = beta_mprp(next.gnorm, cur.gnorm, inner(next.g, tg));

      // S = t Z_k, Y = g_+ - T(g_k); S is left at X_k.
      const double ss = t * t * inner(z, z);
      const double ys = t * (inner(next.g, z) - inner(tg, z));
      t_init = bb_initial_step(ss, ys, params);

      IterationRecord rec;
      rec.k = k;
      rec.f = cur.f;
      rec.grad_norm = cur.gnorm;
      rec.t = t;
      rec.beta = beta;
      rec.nfe = ls->nfe;
      rec.slope = slope;
      rec.window_offset = window_offset;
      rec.delta = ls->delta;
      rec.restarted = restarted;
      res.trace.push_back(rec);

      z = combine(-1.0, next.g, beta, tz);
      cur = std::move(next);
      deltas.push_back(ls->delta);
      ++k;
      res.obj_history.push_back(cur.f);
      res.grad_history.push_back(cur.gnorm);
    }

    if (check_feasibility(mf, cur.x) <= params.epsilon_c ||
        restorations >= kMaxRestorations)
      break;

    // Drifted off the constraint: pull back and re-evaluate.
    ProductPoint restored;
    restored.reserve(cur.x.size());
    for (std::size_t i = 0; i < cur.x.size(); ++i)
      restored.push_back(restore_feasibility(mf.factor(i), cur.x[i].x()));
    cur = evaluate(problem, std::move(restored));
    ++nfe;
    ++restorations;
    res.restored = true;
    res.obj_history.back() = cur.f;
    res.grad_history.back() = cur.gnorm;
    if (failed || cur.gnorm <= params.epsilon || k >= params.max_iterations) break;
    z = scaled(-1.0, cur.g);
    deltas.clear();
    t_init = params.t0;
  }

  res.x = cur.x;
  res.obj = problem.objective(raw_matrices(cur.x));
  res.grad_norm = cur.gnorm;
  res.rel_grad_norm = res.initial_grad_norm > 0.0 ? cur.gnorm / res.initial_grad_norm : 0.0;
  res.iterations = k;
  res.nfe = nfe;
  res.feasibility = check_feasibility(mf, cur.x);
  res.converged = cur.gnorm <= params.epsilon;
  if (res.stop_reason.empty())
    res.stop_reason = res.converged ? "gradient tolerance" : "iteration limit";
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace gstiefel
