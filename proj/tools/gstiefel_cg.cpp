// gstiefel-cg: run the CG variants on GEVP / CCA benchmarks, or the
// self-check suite.
//
//   gstiefel-cg gevp --kind diag --n 200 --p 5 --variant algor1a --trials 10
//   gstiefel-cg cca --m 1000 --n 100 --p 10 --variant all --format json
//   gstiefel-cg check --n 60 --p 4

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gstiefel/bench.hpp"
#include "gstiefel/diagnostics.hpp"
#include "gstiefel/kernels.hpp"

namespace {

using namespace gstiefel;
using json = nlohmann::json;

void apply_params_file(const std::string& path, SolverParams& p) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read params file " + path);
  const json j = json::parse(in);
  for (const auto& [key, value] : j.items()) {
    if (key == "epsilon") p.epsilon = value.get<double>();
    else if (key == "epsilon_c") p.epsilon_c = value.get<double>();
    else if (key == "delta") p.delta = value.get<double>();
    else if (key == "q") p.q = value.get<int>();
    else if (key == "sigma") p.sigma = value.get<double>();
    else if (key == "t0") p.t0 = value.get<double>();
    else if (key == "t_min") p.t_min = value.get<double>();
    else if (key == "t_max") p.t_max = value.get<double>();
    else if (key == "max_iterations" || key == "K") p.max_iterations = value.get<int>();
    else if (key == "max_backtracks") p.max_backtracks = value.get<int>();
    else throw std::runtime_error("unknown solver parameter '" + key + "'");
  }
}

std::vector<Variant> parse_variants(const std::string& s) {
  if (s == "all") return all_variants();
  std::vector<Variant> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_variant(item));
  return out;
}

int default_threads() {
  if (const char* env = std::getenv("GSTIEFEL_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

struct Options {
  RunConfig config;
  std::string variant = "algor1a";
  std::string kind = "diag";
  std::string params_file;
  std::string matrix_a, matrix_m;
  std::string out;
  std::string format = "csv";
  std::string save_instance;
  std::vector<double> mu;
};

int run_bench(Options& o, ProblemKind problem) {
  RunConfig& c = o.config;
  c.problem = problem;
  c.variants = parse_variants(o.variant);
  if (problem == ProblemKind::Gevp) c.kind = parse_gevp_kind(o.kind);
  if (!o.params_file.empty()) apply_params_file(o.params_file, c.params);
  if (!o.matrix_a.empty()) c.matrix_a = o.matrix_a;
  if (!o.matrix_m.empty()) c.matrix_m = o.matrix_m;
  if (!o.mu.empty())
    c.cca_weights = Eigen::Map<const Vector>(o.mu.data(), static_cast<Index>(o.mu.size()));
  kernels::set_num_threads(c.threads);

  if (!o.save_instance.empty()) {
    if (problem == ProblemKind::Gevp && !c.matrix_a)
      save_instance(o.save_instance,
                    generate_gevp_instance(c.kind, c.n, c.p, c.seed, c.samples));
    else if (problem == ProblemKind::Cca)
      save_instance(o.save_instance, generate_cca_instance(c.m, c.n, c.p, c.samples,
                                                           c.seed, c.cca_weights));
  }

  const BenchmarkReport report = run_benchmark(c);

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw std::runtime_error("cannot write " + o.out);
  }
  std::ostream& out = o.out.empty() ? std::cout : file;
  if (o.format == "json")
    write_json(out, c, report);
  else
    write_csv(out, report.rows);

  for (const TrialRecord& r : report.records)
    if (r.failed)
      std::cerr << "trial " << r.trial << " (" << r.algorithm << ", seed " << r.seed
                << ") failed: " << r.error << '\n';
  return report.any_failure ? 1 : 0;
}

void add_common(CLI::App* cmd, Options& o) {
  RunConfig& c = o.config;
  cmd->add_option("--p", c.p, "Number of columns")->check(CLI::PositiveNumber);
  cmd->add_option("--variant", o.variant,
                  "algor1a|algor1b|cg-cholqr|cg-pol|cg-cayley-full, a comma list, or all");
  cmd->add_option("--trials", c.trials, "Number of seeded trials")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Base seed; trial t uses seed + t");
  cmd->add_option("--samples", c.samples, "S (GEVP metric) or T (CCA covariances)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--params", o.params_file, "JSON file overriding solver defaults")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output file (default stdout)");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", c.threads, "Worker threads (env GSTIEFEL_THREADS)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--save-instance", o.save_instance,
                  "Write the seed's instance as a MatrixMarket bundle to this directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian conjugate gradient on generalized Stiefel manifolds"};
  app.set_version_flag("--version", std::string(GSTIEFEL_VERSION));
  app.require_subcommand(1);

  Options o;
  o.config.threads = default_threads();

  CLI::App* gevp = app.add_subcommand("gevp", "Generalized eigenvalue problem");
  add_common(gevp, o);
  gevp->add_option("--n", o.config.n, "Matrix size")->check(CLI::PositiveNumber);
  gevp->add_option("--kind", o.kind, "diag or random")
      ->check(CLI::IsMember({"diag", "random"}));
  gevp->add_option("--matrix-a", o.matrix_a, "MatrixMarket file for A")
      ->check(CLI::ExistingFile);
  gevp->add_option("--matrix-m", o.matrix_m, "MatrixMarket file for M (default I)")
      ->check(CLI::ExistingFile);

  CLI::App* cca = app.add_subcommand("cca", "Canonical correlation analysis");
  add_common(cca, o);
  cca->add_option("--m", o.config.m, "Dimension of the first view")
      ->check(CLI::PositiveNumber);
  cca->add_option("--n", o.config.n, "Dimension of the second view")
      ->check(CLI::PositiveNumber);
  cca->add_option("--mu", o.mu, "Diagonal of N (strictly decreasing)")->delimiter(',');

  CheckOptions check_opts;
  CLI::App* check = app.add_subcommand("check", "Run the property suite");
  check->add_option("--n", check_opts.n, "Matrix size")->check(CLI::PositiveNumber);
  check->add_option("--p", check_opts.p, "Number of columns")->check(CLI::PositiveNumber);
  check->add_option("--seed", check_opts.seed, "Seed");
  check->add_option("--samples", check_opts.samples, "Random samples per property")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gevp->parsed()) return run_bench(o, ProblemKind::Gevp);
    if (cca->parsed()) {
      if (!cca->count("--m")) o.config.m = 1000;
      if (!cca->count("--n")) o.config.n = 100;
      if (!cca->count("--p")) o.config.p = 10;
      return run_bench(o, ProblemKind::Cca);
    }
    kernels::set_num_threads(o.config.threads);
    bool ok = true;
    for (const CheckResult& r : run_property_suite(check_opts)) {
      std::printf("%-34s %-4s value=%.3e tol=%.1e\n", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.value, r.tolerance);
      ok = ok && r.passed;
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "gstiefel-cg: " << e.what() << '\n';
    return 1;
  }
}
