#pragma once

// Benchmark harness behind the CLI: instance generation per trial, variant
// selection, averaging and CSV/JSON reports.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gstiefel/problems.hpp"

namespace gstiefel {

enum class Variant {
  Algor1a,       ///< Cayley (SMW), differentiated-retraction transport
  Algor1b,       ///< Cayley (SMW), isometric transport
  CgCholQR,      ///< CholQR retraction, projection transport
  CgPol,         ///< polar retraction, projection transport
  CgCayleyFull,  ///< dense Cayley retraction, projection transport
};

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
const std::vector<Variant>& all_variants();

/// `base` with the retraction/transport fields of the variant filled in.
SolverParams variant_params(Variant v, SolverParams base = {});

enum class ProblemKind { Gevp, Cca };

struct RunConfig {
  ProblemKind problem = ProblemKind::Gevp;
  std::vector<Variant> variants{Variant::Algor1a};
  GevpKind kind = GevpKind::DiagA;
  Index n = 200;
  Index m = 1000;  ///< CCA only
  Index p = 5;
  Index samples = 1000;  ///< S for GEVP metrics, T for CCA covariances
  int trials = 10;
  std::uint64_t seed = 42;
  int threads = 1;
  SolverParams params;
  std::optional<Vector> cca_weights;
  /// User-supplied GEVP matrices; each trial then only redraws X0.
  std::optional<std::filesystem::path> matrix_a;
  std::optional<std::filesystem::path> matrix_m;

  void validate() const;
};

struct TrialRecord {
  std::string algorithm;
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double obj = 0.0;  ///< reporting convention
  double grad_norm = 0.0;
  double rel_grad_norm = 0.0;
  int iterations = 0;
  int nfe = 0;
  double cpu = 0.0;
  double feasibility = 0.0;
  bool converged = false;
  std::string stop_reason;
};

/// Averages over the completed trials of one algorithm.
struct ReportRow {
  std::string algorithm;
  double obj = 0.0;
  double nrm_grad = 0.0;
  double rnrm_grad = 0.0;
  double itr = 0.0;
  double nfe = 0.0;
  double cpu = 0.0;
  double feasi = 0.0;
  int converged = 0;
  int completed = 0;
  int trials = 0;
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;
  std::vector<TrialRecord> records;
  bool any_failure = false;
};

/// Trial t uses seed + t for the instance and the starting point. Trials run
/// in parallel when config.threads > 1; results do not depend on scheduling.
BenchmarkReport run_benchmark(const RunConfig& config);

inline constexpr const char* kCsvHeader =
    "algorithm,obj,nrmGrad,rnrmGrad,itr,nfe,cpu,feasi,converged";

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);
void write_json(std::ostream& out, const RunConfig& config,
                const BenchmarkReport& report);

}  // namespace gstiefel
