#include "gstiefel/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "gstiefel/baselines.hpp"
#include "gstiefel/problems.hpp"

namespace gstiefel {

double directional_derivative_error(const Problem& problem, const ProductPoint& x,
                                    const ProductTangent& xi, double h) {
  const ProductManifold& mf = problem.manifold();
  const std::vector<Matrix> raw = raw_matrices(x);
  const ProductTangent g = egrad_to_rgrad(mf, x, problem.euclidean_gradient(raw));
  const double exact = inner(g, xi);

  auto f_at = [&](double t) {
    std::vector<Matrix> moved;
    for (std::size_t i = 0; i < x.size(); ++i)
      moved.push_back(CayleyStep(mf.factor(i), x[i], xi[i], t, RetractionStrategy::Auto)
                          .point());
    return problem.objective(moved);
  };
  const double fd = (f_at(h) - f_at(-h)) / (2.0 * h);
  const double scale = norm(g) * norm(xi);
  if (!(scale > 0.0)) return std::abs(fd);
  return std::abs(fd - exact) / scale;
}

namespace {

// Least-squares slope of log(err) against log(t).
double loglog_slope(const std::vector<double>& t, const std::vector<double>& err) {
  const double k = static_cast<double>(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double lx = std::log(t[i]), ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

CheckResult at_most(std::string name, double value, double tol) {
  return {std::move(name), value, tol, std::isfinite(value) && value <= tol};
}

CheckResult at_least(std::string name, double value, double tol) {
  return {std::move(name), value, tol, std::isfinite(value) && value >= tol};
}

}  // namespace

std::vector<CheckResult> run_property_suite(const CheckOptions& opts) {
  if (opts.n < 2 || opts.p < 1 || 2 * opts.p > opts.n)
    throw std::invalid_argument("check: need n >= 2p >= 2");
  if (opts.samples < 1) throw std::invalid_argument("check: samples must be positive");

  const Index n = opts.n, p = opts.p;
  const GevpInstance gevp = generate_gevp_instance(GevpKind::RandomA, n, p, opts.seed,
                                                   std::max<Index>(2 * n, 100));
  const MetricContext ctx(gevp.m);
  Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif_t(0.0, 2.0);

  double feas = 0, full_vs_low = 0, t0_identity = 0, rw = 0, iso = 0, tangency = 0;
  double baseline_feas = 0, min_slope = 1e300;
  for (int s = 0; s < opts.samples; ++s) {
    const ManifoldPoint x = random_point(ctx, p, rng);
    const TangentVector z = random_tangent(ctx, x, rng);
    const TangentVector y = random_tangent(ctx, x, rng);
    const double t = unif_t(rng);

    const CayleyStep low(ctx, x, z, t, RetractionStrategy::LowRank);
    const CayleyStep full(ctx, x, z, t, RetractionStrategy::Full);
    const ManifoldPoint at = low.retracted_point();
    feas = std::max({feas, check_feasibility(at), check_feasibility(ctx, full.point())});
    full_vs_low = std::max(full_vs_low, (low.point() - full.point()).norm() /
                                            full.point().norm());
    t0_identity = std::max(t0_identity, (retract(ctx, x, z, 0.0).x() - x.x()).norm());

    const TangentVector tdz = low.transport_diff_direction(at);
    const TangentVector tiy = low.transport_iso(y, at);
    rw = std::max(rw, norm(tdz) / norm(z) - 1.0);
    iso = std::max(iso, std::abs(norm(tiy) - norm(y)));
    tangency = std::max({tangency, tangency_residual(at, tdz.z()),
                         tangency_residual(at, tiy.z()),
                         tangency_residual(at, low.transport_diff(y, at).z())});

    for (BaselineKind kind : {BaselineKind::CholQR, BaselineKind::Polar})
      baseline_feas = std::max(
          baseline_feas, check_feasibility(ctx, baseline_retract_raw(kind, x, z, t)));

    std::vector<double> ts{1e-1, 1e-2, 1e-3}, errs;
    for (double tt : ts)
      errs.push_back((CayleyStep(ctx, x, z, tt, RetractionStrategy::Auto).point() -
                      x.x() - tt * z.z())
                         .norm());
    min_slope = std::min(min_slope, loglog_slope(ts, errs));
  }

  std::vector<CheckResult> out;
  out.push_back(at_most("retraction.feasibility", feas, 1e-10));
  out.push_back(at_most("retraction.full_vs_lowrank", full_vs_low, 1e-10));
  out.push_back(at_most("retraction.t0_identity", t0_identity, 0.0));
  out.push_back(at_least("retraction.second_order_slope", min_slope, 1.9));
  out.push_back(at_most("transport_diff.ring_wirth_excess", rw, 1e-12));
  out.push_back(at_most("transport_iso.isometry", iso, 1e-10));
  out.push_back(at_most("transport.tangency", tangency, 1e-10));
  out.push_back(at_most("baselines.feasibility", baseline_feas, 1e-11));

  // Gradient consistency of both problems.
  const GevpProblem gp(gevp);
  const Index cm = std::max<Index>(n / 2, p), cn = std::max<Index>(n / 3, p);
  const CcaInstance cca =
      generate_cca_instance(cm, std::min(cn, cm), p, 4 * cm + 100, opts.seed + 1);
  const CcaProblem cp(cca);
  double gevp_fd = 0, cca_fd = 0;
  for (int s = 0; s < std::min(opts.samples, 10); ++s) {
    const ProductPoint xg = random_point(gp.manifold(), p, rng);
    gevp_fd = std::max(gevp_fd, directional_derivative_error(
                                    gp, xg, random_tangent(gp.manifold(), xg, rng)));
    const ProductPoint xc = random_point(cp.manifold(), p, rng);
    cca_fd = std::max(cca_fd, directional_derivative_error(
                                  cp, xc, random_tangent(cp.manifold(), xc, rng)));
  }
  out.push_back(at_most("gevp.gradient_fd", gevp_fd, 1e-5));
  out.push_back(at_most("cca.gradient_fd", cca_fd, 1e-5));

  // A small solve against the dense oracle.
  const ProductPoint x0 = random_point(gp.manifold(), p, rng);
  const SolveResult res = solve(gp, x0, SolverParams{});
  const double oracle = gevp_oracle(gevp);
  out.push_back(at_most("gevp.solve_converged", res.converged ? 0.0 : res.grad_norm, 0.0));
  out.push_back(at_most("gevp.solve_vs_oracle",
                        std::abs(res.obj - oracle) / std::abs(oracle), 1e-6));
  out.push_back(at_most("gevp.solve_feasibility", res.feasibility, 1e-13));
  return out;
}

}  // namespace gstiefel
