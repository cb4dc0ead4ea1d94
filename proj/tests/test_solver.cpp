#include <gtest/gtest.h>

#include <cmath>

#include "gstiefel/problems.hpp"
#include "gstiefel/solver.hpp"
#include "oracles.hpp"

namespace gstiefel {
namespace {

TEST(Beta, Examples) {
  EXPECT_EQ(beta_mprp(0.0, 2.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(beta_mprp(3.0, 2.0, 0.0), 9.0 / 4.0);  // Fletcher-Reeves value
  // T(g) = g_+ ||g|| / ||g_+||: <g_+, T(g)> = ||g_+|| ||g||.
  EXPECT_NEAR(beta_mprp(3.0, 2.0, 3.0 * 2.0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(beta_mprp(3.0, 2.0, -1.0), (9.0 - 1.5) / 4.0);
  EXPECT_THROW(beta_mprp(1.0, 0.0, 0.0), DegeneracyError);
}

TEST(Beta, NonNegativeUnderIsometryAndBoundedByFr) {
  std::mt19937_64 r(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    const double a = std::abs(u(r)) + 1e-3;
    const double b = std::abs(u(r)) + 1e-3;
    // |c| <= a b when ||T(g)|| = ||g||.
    const double c = u(r) * a * b;
    const double beta = beta_mprp(a, b, c);
    EXPECT_GE(beta, -1e-15);
    EXPECT_LE(beta, a * a / (b * b) + 1e-15);
  }
}

TEST(BarzilaiBorwein, Examples) {
  SolverParams p;
  EXPECT_EQ(bb_initial_step(4.0, 4.0, p), 1.0);  // Y = S
  EXPECT_EQ(bb_initial_step(4.0, 0.0, p), p.t_max);
  EXPECT_EQ(bb_initial_step(4.0, -8.0, p), 0.5);
  EXPECT_EQ(bb_initial_step(1.0, 1e40, p), p.t_min);
  p.t_max = 100.0;
  EXPECT_EQ(bb_initial_step(9.0, 3.0, p), 3.0);
}

TEST(BarzilaiBorwein, MetricOverload) {
  std::mt19937_64 r(2);
  const Matrix m = oracle::spd_with_condition(10, 10.0, r);
  const MetricContext ctx(m);
  const Matrix s = oracle::randn(10, 2, r);
  SolverParams p;
  EXPECT_EQ(bb_initial_step(ctx, s, s, p), std::min(1.0, p.t_max));
  const Matrix y = -4.0 * s;
  EXPECT_NEAR(bb_initial_step(ctx, 2.0 * s, y, p), 0.5, 1e-14);
}

TEST(Params, Validation) {
  SolverParams p;
  EXPECT_NO_THROW(p.validate());
  auto bad = [](auto mutate) {
    SolverParams q;
    mutate(q);
    EXPECT_THROW(q.validate(), std::invalid_argument);
  };
  bad([](SolverParams& q) { q.epsilon = 0.0; });
  bad([](SolverParams& q) { q.delta = 1.0; });
  bad([](SolverParams& q) { q.sigma = 0.0; });
  bad([](SolverParams& q) { q.q = 0; });
  bad([](SolverParams& q) { q.t_max = q.t_min / 2; });
  bad([](SolverParams& q) { q.max_iterations = -1; });
  bad([](SolverParams& q) {
    q.retraction = RetractionKind::Polar;
    q.transport = TransportKind::Isometric;
  });
}

GevpInstance small_gevp(Index n, Index p, std::uint64_t seed) {
  return generate_gevp_instance(GevpKind::RandomA, n, p, seed, 200);
}

TEST(LineSearch, AcceptedStepSatisfiesCondition) {
  const GevpInstance inst = small_gevp(20, 3, 3);
  const GevpProblem prob(inst);
  Rng rng(4);
  const ProductPoint x = random_point(prob.manifold(), 3, rng);
  const ProductTangent g = egrad_to_rgrad(prob.manifold(), x, prob.euclidean_gradient(raw_matrices(x)));
  const ProductTangent z = scaled(-1.0, g);
  const double slope = inner(g, z);
  SolverParams params;
  const std::vector<double> window{0.0};
  const LineSearchResult ls = line_search_nonmonotone(prob, x, z, window, 1.0, slope, params);
  const double f0 = prob.objective(raw_matrices(x));
  const double f1 = prob.objective(ls.step.x);
  EXPECT_LE(f1, f0 + params.delta * ls.step.t * slope + 1e-12 * std::abs(f0));
  EXPECT_NEAR(ls.delta, f1 - f0, 1e-10 * std::abs(f0));
  EXPECT_EQ(ls.nfe, static_cast<int>(std::lround(std::log(ls.step.t) / std::log(params.sigma))) + 1);
}

TEST(LineSearch, WindowSlackAcceptsFirstTrial) {
  const GevpInstance inst = small_gevp(20, 3, 5);
  const GevpProblem prob(inst);
  Rng rng(6);
  const ProductPoint x = random_point(prob.manifold(), 3, rng);
  const ProductTangent g = egrad_to_rgrad(prob.manifold(), x, prob.euclidean_gradient(raw_matrices(x)));
  const ProductTangent z = scaled(-1.0, g);
  const std::vector<double> window{100.0, 0.0};
  const LineSearchResult ls = line_search_nonmonotone(prob, x, z, window, 1e-3, inner(g, z), {});
  EXPECT_EQ(ls.nfe, 1);
  EXPECT_EQ(ls.step.t, 1e-3);
}

TEST(LineSearch, FailureCarriesBestTrial) {
  const GevpInstance inst = small_gevp(20, 3, 7);
  const GevpProblem prob(inst);
  Rng rng(8);
  const ProductPoint x = random_point(prob.manifold(), 3, rng);
  const ProductTangent g = egrad_to_rgrad(prob.manifold(), x, prob.euclidean_gradient(raw_matrices(x)));
  // Ascent direction with a lying slope: no trial can satisfy the test.
  SolverParams params;
  params.max_backtracks = 3;
  try {
    line_search_nonmonotone(prob, x, g, std::vector<double>{0.0}, 1e-6, -1e6, params);
    FAIL() << "expected LineSearchError";
  } catch (const LineSearchError& e) {
    EXPECT_EQ(e.nfe(), 4);
    EXPECT_GT(e.best_t(), 0.0);
  }
  EXPECT_THROW(line_search_nonmonotone(prob, x, g, std::vector<double>{0.0}, 1.0, 1.0, params),
               DegeneracyError);
}

TEST(Solve, StationaryStartStopsImmediately) {
  std::mt19937_64 r(9);
  GevpInstance inst;
  inst.m = oracle::spd_with_condition(15, 1e2, r);
  inst.a = inst.m;
  inst.p = 3;
  const GevpProblem prob(inst);
  Rng rng(10);
  const SolveResult res = solve(prob, random_point(prob.manifold(), 3, rng), {});
  EXPECT_EQ(res.iterations, 0);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.grad_norm, 1e-10);
  EXPECT_NEAR(prob.reported_objective(res.obj), 3.0, 1e-10);
}

class GevpSolve : public ::testing::TestWithParam<TransportKind> {};

TEST_P(GevpSolve, MatchesIndependentOracle) {
  const GevpInstance inst = generate_gevp_instance(GevpKind::DiagA, 200, 5, 42);
  const GevpProblem prob(inst);
  Rng rng(11);
  SolverParams params;
  params.transport = GetParam();
  const SolveResult res = solve(prob, random_point(prob.manifold(), 5, rng), params);
  ASSERT_TRUE(res.converged) << res.stop_reason;
  const double ref = oracle::top_generalized_eigensum(inst.a, inst.m, 5);
  EXPECT_NEAR(-res.obj, ref, 1e-6 * ref);
  EXPECT_LE(res.feasibility, 1e-13);
  EXPECT_LE(res.grad_norm, params.epsilon);
  EXPECT_EQ(static_cast<int>(res.trace.size()), res.iterations);
  EXPECT_EQ(res.obj_history.size(), res.trace.size() + 1);
  for (const IterationRecord& rec : res.trace) {
    EXPECT_LT(rec.slope, 0.0);
    EXPECT_LE(rec.delta, rec.window_offset + params.delta * rec.t * rec.slope);
    if (params.transport == TransportKind::Isometric) {
      EXPECT_GE(rec.beta, -1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Transports, GevpSolve,
                         ::testing::Values(TransportKind::DiffRetraction,
                                           TransportKind::Isometric));

TEST(Solve, BaselineRetractionsConverge) {
  const GevpInstance inst = small_gevp(60, 3, 12);
  const GevpProblem prob(inst);
  const double ref = oracle::top_generalized_eigensum(inst.a, inst.m, 3);
  for (RetractionKind kind : {RetractionKind::CholQR, RetractionKind::Polar}) {
    SolverParams params;
    params.retraction = kind;
    params.transport = TransportKind::Projection;
    Rng rng(13);
    const SolveResult res = solve(prob, random_point(prob.manifold(), 3, rng), params);
    EXPECT_TRUE(res.converged) << res.stop_reason;
    EXPECT_NEAR(-res.obj, ref, 1e-6 * ref);
  }
}

TEST(Solve, CcaMatchesIndependentOracle) {
  const CcaInstance inst = generate_cca_instance(100, 50, 5, 100, 14);
  const CcaProblem prob(inst);
  Rng rng(15);
  const SolveResult res = solve(prob, random_point(prob.manifold(), 5, rng), {});
  ASSERT_TRUE(res.converged) << res.stop_reason;
  const double ref = oracle::weighted_canonical_sum(inst.cx, inst.cy, inst.cxy, inst.mu);
  EXPECT_NEAR(-res.obj, ref, 1e-6 * ref);
  EXPECT_LE(res.feasibility, 1e-13);
}

TEST(Solve, DeterministicHistory) {
  const GevpInstance inst = small_gevp(40, 3, 16);
  const GevpProblem prob(inst);
  Rng r1(17), r2(17);
  const SolveResult a = solve(prob, random_point(prob.manifold(), 3, r1), {});
  const SolveResult b = solve(prob, random_point(prob.manifold(), 3, r2), {});
  EXPECT_EQ(a.obj_history, b.obj_history);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Solve, IterationLimitReported) {
  const GevpInstance inst = small_gevp(40, 3, 18);
  const GevpProblem prob(inst);
  Rng rng(19);
  SolverParams params;
  params.max_iterations = 2;
  const SolveResult res = solve(prob, random_point(prob.manifold(), 3, rng), params);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 2);
  EXPECT_EQ(res.stop_reason, "iteration limit");
  EXPECT_NEAR(res.rel_grad_norm, res.grad_norm / res.initial_grad_norm, 1e-15);
}

TEST(Solve, FeasibilityDriftStaysSmall) {
  const GevpInstance inst = generate_gevp_instance(GevpKind::RandomA, 100, 4, 20);
  const GevpProblem prob(inst);
  Rng rng(21);
  SolverParams params;
  params.epsilon_c = 1.0;  // disables restoration
  const SolveResult res = solve(prob, random_point(prob.manifold(), 4, rng), params);
  EXPECT_FALSE(res.restored);
  EXPECT_GT(res.iterations, 10);
  EXPECT_LE(res.feasibility, 1e-8);
}

}  // namespace
}  // namespace gstiefel
