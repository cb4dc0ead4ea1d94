#include "gstiefel/bench.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "gstiefel/matrix_market.hpp"

namespace gstiefel {

namespace {

using json = nlohmann::json;

// Separate stream for X0 so the instance draw does not depend on p.
constexpr std::uint64_t kStartStream = 0x5851f42d4c957f2dULL;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const char* transport_name(TransportKind t) {
  switch (t) {
    case TransportKind::DiffRetraction: return "diff-retraction";
    case TransportKind::Isometric: return "isometric";
    case TransportKind::Projection: return "projection";
  }
  return "?";
}

const char* retraction_name(const SolverParams& p) {
  switch (p.retraction) {
    case RetractionKind::CholQR: return "cholqr";
    case RetractionKind::Polar: return "polar";
    case RetractionKind::Cayley: break;
  }
  switch (p.strategy) {
    case RetractionStrategy::Full: return "cayley-full";
    case RetractionStrategy::LowRank: return "cayley-lowrank";
    case RetractionStrategy::Auto: break;
  }
  return "cayley-auto";
}

json params_json(const SolverParams& p) {
  return {{"epsilon", p.epsilon},   {"epsilon_c", p.epsilon_c},
          {"delta", p.delta},       {"q", p.q},
          {"sigma", p.sigma},       {"t0", p.t0},
          {"t_min", p.t_min},       {"t_max", p.t_max},
          {"max_iterations", p.max_iterations},
          {"max_backtracks", p.max_backtracks}};
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Algor1a: return "algor1a";
    case Variant::Algor1b: return "algor1b";
    case Variant::CgCholQR: return "cg-cholqr";
    case Variant::CgPol: return "cg-pol";
    case Variant::CgCayleyFull: return "cg-cayley-full";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : all_variants())
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown variant '" + s + "'");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::Algor1a, Variant::Algor1b,
                                      Variant::CgCholQR, Variant::CgPol,
                                      Variant::CgCayleyFull};
  return v;
}

SolverParams variant_params(Variant v, SolverParams base) {
  base.retraction = RetractionKind::Cayley;
  base.strategy = RetractionStrategy::Auto;
  switch (v) {
    case Variant::Algor1a:
      base.transport = TransportKind::DiffRetraction;
      break;
    case Variant::Algor1b:
      base.transport = TransportKind::Isometric;
      break;
    case Variant::CgCholQR:
      base.retraction = RetractionKind::CholQR;
      base.transport = TransportKind::Projection;
      break;
    case Variant::CgPol:
      base.retraction = RetractionKind::Polar;
      base.transport = TransportKind::Projection;
      break;
    case Variant::CgCayleyFull:
      base.strategy = RetractionStrategy::Full;
      base.transport = TransportKind::Projection;
      break;
  }
  return base;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (trials < 1) fail("trials must be at least 1");
  if (threads < 1) fail("threads must be at least 1");
  if (variants.empty()) fail("no variant selected");
  if (p < 1) fail("p must be positive");
  if (problem == ProblemKind::Gevp) {
    if (!matrix_a && (n < p)) fail("need n >= p");
    if (!matrix_a && kind == GevpKind::User) fail("kind 'user' needs --matrix-a");
    if (matrix_m && !matrix_a) fail("--matrix-m requires --matrix-a");
  } else {
    if (!(p <= n && n <= m)) fail("CCA needs p <= n <= m");
    if (cca_weights && cca_weights->size() != p) fail("N diagonal must have p entries");
  }
  if (samples < 1) fail("samples must be positive");
  params.validate();
}

BenchmarkReport run_benchmark(const RunConfig& config) {
  config.validate();
  const int nv = static_cast<int>(config.variants.size());
  const int nt = config.trials;

  // User matrices are loaded once and shared by every trial.
  std::optional<GevpInstance> user;
  if (config.problem == ProblemKind::Gevp && config.matrix_a) {
    GevpInstance inst;
    inst.a = read_matrix_market(*config.matrix_a);
    inst.m = config.matrix_m ? read_matrix_market(*config.matrix_m)
                             : Matrix::Identity(inst.a.rows(), inst.a.rows());
    inst.p = config.p;
    inst.kind = GevpKind::User;
    inst.validate();
    user = std::move(inst);
  }

  std::vector<TrialRecord> records(static_cast<std::size_t>(nt * nv));
  const int team = nt > 1 ? std::min(config.threads, nt) : 1;

#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (int t = 0; t < nt; ++t) {
    const std::uint64_t seed_t = config.seed + static_cast<std::uint64_t>(t);
    auto fill_failure = [&](const std::string& msg) {
      for (int v = 0; v < nv; ++v) {
        TrialRecord& r = records[static_cast<std::size_t>(t * nv + v)];
        r.algorithm = to_string(config.variants[v]);
        r.trial = t;
        r.seed = seed_t;
        r.failed = true;
        r.error = msg;
      }
    };
    try {
      std::unique_ptr<Problem> problem;
      if (config.problem == ProblemKind::Gevp) {
        problem = user ? gevp_problem(*user)
                       : gevp_problem(generate_gevp_instance(
                             config.kind, config.n, config.p, seed_t, config.samples));
      } else {
        problem = cca_problem(generate_cca_instance(config.m, config.n, config.p,
                                                    config.samples, seed_t,
                                                    config.cca_weights));
      }
      Rng rng(seed_t ^ kStartStream);
      const ProductPoint x0 = random_point(problem->manifold(), config.p, rng);

      for (int v = 0; v < nv; ++v) {
        TrialRecord& r = records[static_cast<std::size_t>(t * nv + v)];
        r.algorithm = to_string(config.variants[v]);
        r.trial = t;
        r.seed = seed_t;
        try {
          const SolveResult res =
              solve(*problem, x0, variant_params(config.variants[v], config.params));
          r.obj = problem->reported_objective(res.obj);
          r.grad_norm = res.grad_norm;
          r.rel_grad_norm = res.rel_grad_norm;
          r.iterations = res.iterations;
          r.nfe = res.nfe;
          r.cpu = res.wall_time;
          r.feasibility = res.feasibility;
          r.converged = res.converged;
          r.stop_reason = res.stop_reason;
        } catch (const std::exception& e) {
          r.failed = true;
          r.error = e.what();
        }
      }
    } catch (const std::exception& e) {
      fill_failure(e.what());
    }
  }

  BenchmarkReport report;
  report.records = std::move(records);
  for (int v = 0; v < nv; ++v) {
    ReportRow row;
    row.algorithm = to_string(config.variants[v]);
    row.trials = nt;
    for (int t = 0; t < nt; ++t) {
      const TrialRecord& r = report.records[static_cast<std::size_t>(t * nv + v)];
      if (r.failed) {
        report.any_failure = true;
        continue;
      }
      ++row.completed;
      row.obj += r.obj;
      row.nrm_grad += r.grad_norm;
      row.rnrm_grad += r.rel_grad_norm;
      row.itr += r.iterations;
      row.nfe += r.nfe;
      row.cpu += r.cpu;
      row.feasi += r.feasibility;
      row.converged += r.converged ? 1 : 0;
    }
    if (row.completed > 0) {
      const double k = row.completed;
      row.obj /= k;
      row.nrm_grad /= k;
      row.rnrm_grad /= k;
      row.itr /= k;
      row.nfe /= k;
      row.cpu /= k;
      row.feasi /= k;
    }
    report.rows.push_back(row);
  }
  return report;
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ReportRow& r : rows) {
    out << r.algorithm << ',' << fmt("%.10e", r.obj) << ',' << fmt("%.3e", r.nrm_grad)
        << ',' << fmt("%.3e", r.rnrm_grad) << ',' << fmt("%.1f", r.itr) << ','
        << fmt("%.1f", r.nfe) << ',' << fmt("%.3f", r.cpu) << ','
        << fmt("%.3e", r.feasi) << ',' << r.converged << '/' << r.trials << '\n';
  }
}

void write_json(std::ostream& out, const RunConfig& config,
                const BenchmarkReport& report) {
  json meta;
  meta["tool"] = "gstiefel-cg";
  meta["version"] = GSTIEFEL_VERSION;
  meta["problem"] = config.problem == ProblemKind::Gevp ? "gevp" : "cca";
  if (config.problem == ProblemKind::Gevp)
    meta["kind"] = config.matrix_a ? "user" : to_string(config.kind);
  meta["n"] = config.n;
  if (config.problem == ProblemKind::Cca) meta["m"] = config.m;
  meta["p"] = config.p;
  meta["trials"] = config.trials;
  meta["seed"] = config.seed;
  meta["params"] = params_json(config.params);
  json variants = json::object();
  for (Variant v : config.variants) {
    const SolverParams sp = variant_params(v, config.params);
    variants[to_string(v)] = {{"retraction", retraction_name(sp)},
                              {"transport", transport_name(sp.transport)}};
  }
  meta["variants"] = variants;
  meta["columns"] = {
      {"obj", config.problem == ProblemKind::Gevp
                  ? "mean final tr(X^T A X)"
                  : "mean final -tr(U^T Cxy V N)"},
      {"nrmGrad", "mean final Riemannian gradient norm"},
      {"rnrmGrad", "mean of nrmGrad / ||grad f(X0)||"},
      {"itr", "mean iteration count"},
      {"nfe", "mean objective evaluations"},
      {"cpu", "mean wall-clock seconds of the solve call"},
      {"feasi", "mean ||X^T M X - I||_F at exit (max over factors)"},
      {"converged", "trials with nrmGrad <= epsilon / trials"}};

  json rows = json::array();
  for (const ReportRow& r : report.rows)
    rows.push_back({{"algorithm", r.algorithm}, {"obj", r.obj},
                    {"nrmGrad", r.nrm_grad},    {"rnrmGrad", r.rnrm_grad},
                    {"itr", r.itr},             {"nfe", r.nfe},
                    {"cpu", r.cpu},             {"feasi", r.feasi},
                    {"converged", r.converged}, {"completed", r.completed},
                    {"trials", r.trials}});

  json trials = json::array();
  for (const TrialRecord& r : report.records) {
    json j = {{"algorithm", r.algorithm}, {"trial", r.trial}, {"seed", r.seed},
              {"failed", r.failed}};
    if (r.failed) {
      j["error"] = r.error;
    } else {
      j.update({{"obj", r.obj},
                {"nrmGrad", r.grad_norm},
                {"rnrmGrad", r.rel_grad_norm},
                {"itr", r.iterations},
                {"nfe", r.nfe},
                {"cpu", r.cpu},
                {"feasi", r.feasibility},
                {"converged", r.converged},
                {"stop_reason", r.stop_reason}});
    }
    trials.push_back(std::move(j));
  }

  out << json{{"metadata", meta}, {"rows", rows}, {"trials", trials}}.dump(2) << '\n';
}

}  // namespace gstiefel
