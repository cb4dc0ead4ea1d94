#include "gstiefel/problems.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "gstiefel/kernels.hpp"
#include "gstiefel/matrix_market.hpp"

namespace gstiefel {

namespace {

using json = nlohmann::json;

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

bool is_symmetric(const Matrix& a, double rtol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.norm(), 1.0);
  return (a - a.transpose()).norm() <= rtol * scale;
}

bool is_diagonal(const Matrix& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != 0.0) return false;
  return true;
}

// Lower Cholesky factor or NumericError.
Matrix cholesky_lower(const Matrix& c, const char* what) {
  const Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success)
    throw NumericError(std::string(what) + ": matrix is not positive definite");
  return llt.matrixL();
}

void write_manifest(const std::filesystem::path& dir, const json& j) {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

json read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("cannot read " + (dir / "manifest.json").string());
  return json::parse(in);
}

}  // namespace

std::string to_string(GevpKind kind) {
  switch (kind) {
    case GevpKind::DiagA: return "diag";
    case GevpKind::RandomA: return "random";
    case GevpKind::User: return "user";
  }
  return "user";
}

GevpKind parse_gevp_kind(const std::string& s) {
  if (s == "diag" || s == "DiagA") return GevpKind::DiagA;
  if (s == "random" || s == "RandomA") return GevpKind::RandomA;
  if (s == "user" || s == "User") return GevpKind::User;
  throw std::invalid_argument("unknown GEVP kind '" + s + "'");
}

void GevpInstance::validate() const {
  require(a.rows() == a.cols(), "GevpInstance: A must be square");
  require(m.rows() == m.cols() && m.rows() == a.rows(),
          "GevpInstance: A and M must have the same size");
  require(p >= 1 && p <= a.rows(), "GevpInstance: p must lie in [1, n]");
  if (!is_symmetric(a, 1e-12)) throw NumericError("GevpInstance: A is not symmetric");
}

void CcaInstance::validate() const {
  require(cx.rows() == cx.cols(), "CcaInstance: Cx must be square");
  require(cy.rows() == cy.cols(), "CcaInstance: Cy must be square");
  require(cxy.rows() == cx.rows() && cxy.cols() == cy.rows(),
          "CcaInstance: Cxy must be m x n");
  require(mu.size() >= 1 && mu.size() <= std::min(cx.rows(), cy.rows()),
          "CcaInstance: p must lie in [1, min(m, n)]");
  for (Index i = 0; i < mu.size(); ++i) {
    if (!(mu(i) > 0.0)) throw NumericError("CcaInstance: N must be positive");
    if (i > 0 && !(mu(i) < mu(i - 1)))
      throw NumericError("CcaInstance: N must be strictly decreasing");
  }
}

GevpProblem::GevpProblem(const GevpInstance& inst)
    : manifold_({std::make_shared<const MetricContext>(inst.m)}), a_(inst.a) {
  inst.validate();
  if (is_diagonal(a_)) diag_ = a_.diagonal();
}

Matrix GevpProblem::apply_a(const Matrix& x) const {
  if (diag_) return diag_->asDiagonal() * x;
  return kernels::multiply(a_, x);
}

double GevpProblem::objective(std::span<const Matrix> x) const {
  require(x.size() == 1, "GevpProblem: expected one component");
  return -kernels::trace_inner(x[0], apply_a(x[0]));
}

std::vector<Matrix> GevpProblem::euclidean_gradient(std::span<const Matrix> x) const {
  require(x.size() == 1, "GevpProblem: expected one component");
  return {-2.0 * apply_a(x[0])};
}

double GevpProblem::objective_difference(std::span<const Matrix> from,
                                         std::span<const Matrix> to) const {
  require(from.size() == 1 && to.size() == 1, "GevpProblem: expected one component");
  const Matrix d = to[0] - from[0];
  return -kernels::trace_inner(d, apply_a(to[0] + from[0]));
}

CcaProblem::CcaProblem(const CcaInstance& inst)
    : manifold_({std::make_shared<const MetricContext>(inst.cx),
                 std::make_shared<const MetricContext>(inst.cy)}),
      cxy_(inst.cxy),
      mu_(inst.mu) {
  inst.validate();
}

double CcaProblem::objective(std::span<const Matrix> x) const {
  require(x.size() == 2, "CcaProblem: expected two components");
  // tr(U^T Cxy V N) = sum_j mu_j u_j^T (Cxy v_j)
  const Matrix cv = kernels::multiply(cxy_, x[1]);
  return -kernels::trace_inner(x[0], cv * mu_.asDiagonal());
}

std::vector<Matrix> CcaProblem::euclidean_gradient(std::span<const Matrix> x) const {
  require(x.size() == 2, "CcaProblem: expected two components");
  Matrix gu = kernels::multiply(cxy_, x[1]) * mu_.asDiagonal();
  Matrix gv = kernels::transpose_multiply(cxy_, x[0]) * mu_.asDiagonal();
  return {-gu, -gv};
}

double CcaProblem::objective_difference(std::span<const Matrix> from,
                                        std::span<const Matrix> to) const {
  require(from.size() == 2 && to.size() == 2, "CcaProblem: expected two components");
  const Matrix du = to[0] - from[0];
  const Matrix dv = to[1] - from[1];
  const Matrix cv_new = kernels::multiply(cxy_, to[1]) * mu_.asDiagonal();
  const Matrix cdv = kernels::multiply(cxy_, dv) * mu_.asDiagonal();
  return -(kernels::trace_inner(du, cv_new) + kernels::trace_inner(from[0], cdv));
}

std::unique_ptr<GevpProblem> gevp_problem(const GevpInstance& inst) {
  return std::make_unique<GevpProblem>(inst);
}

std::unique_ptr<CcaProblem> cca_problem(const CcaInstance& inst) {
  return std::make_unique<CcaProblem>(inst);
}

double gevp_oracle(const GevpInstance& inst) {
  inst.validate();
  if (inst.a.rows() > 2000) throw DimensionError("gevp_oracle: n > 2000");
  const Matrix l = cholesky_lower(inst.m, "gevp_oracle");
  // C = L^{-1} A L^{-T}
  Matrix c = l.triangularView<Eigen::Lower>().solve(inst.a);
  c = l.triangularView<Eigen::Lower>().solve(c.transpose().eval());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(c), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("gevp_oracle: eigensolver failed");
  const Vector& ev = eig.eigenvalues();  // ascending
  return -ev.tail(inst.p).sum();
}

double cca_oracle(const CcaInstance& inst) {
  inst.validate();
  const Matrix lx = cholesky_lower(inst.cx, "cca_oracle");
  const Matrix ly = cholesky_lower(inst.cy, "cca_oracle");
  // K = Lx^{-1} Cxy Ly^{-T}
  Matrix k = lx.triangularView<Eigen::Lower>().solve(inst.cxy);
  k = ly.triangularView<Eigen::Lower>().solve(k.transpose().eval()).transpose();
  const Eigen::JacobiSVD<Matrix> svd(k);
  const Vector& s = svd.singularValues();  // descending
  return -inst.mu.dot(s.head(inst.p()));
}

GevpInstance generate_gevp_instance(GevpKind kind, Index n, Index p,
                                    std::uint64_t seed, Index s) {
  if (kind == GevpKind::User)
    throw std::invalid_argument("generate_gevp_instance: kind must be diag or random");
  require(n >= 1 && p >= 1 && p <= n, "generate_gevp_instance: need n >= p >= 1");
  require(s >= 1, "generate_gevp_instance: sample count must be positive");
  Rng rng(seed);
  GevpInstance inst;
  inst.p = p;
  inst.kind = kind;
  inst.seed = seed;

  const Matrix y = gaussian_matrix(s, n, rng);
  inst.m = sym(y.transpose() * y / static_cast<double>(s)) + Matrix::Identity(n, n);

  if (kind == GevpKind::DiagA) {
    inst.a = Vector::LinSpaced(n, 1.0, static_cast<double>(n)).asDiagonal();
  } else {
    const Matrix d = gaussian_matrix(n, n, rng);
    inst.a = sym(d.transpose() * d);
  }
  return inst;
}

Vector default_cca_weights(Index p) {
  Vector mu(p);
  for (Index i = 0; i < p; ++i) mu(i) = 1.0 + 0.1 * static_cast<double>(p - i);
  return mu;
}

CcaInstance generate_cca_instance(Index m, Index n, Index p, Index samples,
                                  std::uint64_t seed, std::optional<Vector> mu) {
  require(p >= 1 && p <= n && n <= m, "generate_cca_instance: need p <= n <= m");
  require(samples >= 1, "generate_cca_instance: sample count must be positive");
  Rng rng(seed);
  const Matrix x0 = gaussian_matrix(samples, m, rng);
  const Matrix y0 = gaussian_matrix(samples, n, rng);
  const double inv_t = 1.0 / static_cast<double>(samples);

  CcaInstance inst;
  inst.cx = sym(x0.transpose() * x0 * inv_t);
  inst.cy = sym(y0.transpose() * y0 * inv_t);
  inst.cxy = x0.transpose() * y0 * inv_t;
  inst.mu = mu ? *mu : default_cca_weights(p);
  inst.seed = seed;
  if (inst.mu.size() != p) throw DimensionError("generate_cca_instance: N has wrong size");

  // Rank-deficient covariances (T < dimension) are not usable as metrics.
  cholesky_lower(inst.cx, "generate_cca_instance: Cx");
  cholesky_lower(inst.cy, "generate_cca_instance: Cy");
  const Eigen::SelfAdjointEigenSolver<Matrix> ex(inst.cx, Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Matrix> ey(inst.cy, Eigen::EigenvaluesOnly);
  if (ex.eigenvalues()(0) <= 1e-12 * ex.eigenvalues().maxCoeff() ||
      ey.eigenvalues()(0) <= 1e-12 * ey.eigenvalues().maxCoeff())
    throw NumericError("generate_cca_instance: covariance numerically singular");
  inst.validate();
  return inst;
}

void save_instance(const std::filesystem::path& dir, const GevpInstance& inst) {
  std::filesystem::create_directories(dir);
  write_matrix_market(dir / "A.mtx", inst.a);
  write_matrix_market(dir / "M.mtx", inst.m);
  write_manifest(dir, {{"problem", "gevp"},
                       {"kind", to_string(inst.kind)},
                       {"n", inst.a.rows()},
                       {"p", inst.p},
                       {"seed", inst.seed}});
}

void save_instance(const std::filesystem::path& dir, const CcaInstance& inst) {
  std::filesystem::create_directories(dir);
  write_matrix_market(dir / "Cx.mtx", inst.cx);
  write_matrix_market(dir / "Cy.mtx", inst.cy);
  write_matrix_market(dir / "Cxy.mtx", inst.cxy);
  write_manifest(dir, {{"problem", "cca"},
                       {"m", inst.cx.rows()},
                       {"n", inst.cy.rows()},
                       {"p", inst.p()},
                       {"seed", inst.seed},
                       {"N", std::vector<double>(inst.mu.begin(), inst.mu.end())}});
}

GevpInstance load_gevp_instance(const std::filesystem::path& dir) {
  const json j = read_manifest(dir);
  if (j.value("problem", "") != "gevp") throw FormatError("manifest is not a GEVP bundle");
  GevpInstance inst;
  inst.a = read_matrix_market(dir / "A.mtx");
  inst.m = read_matrix_market(dir / "M.mtx");
  inst.p = j.at("p").get<Index>();
  inst.kind = parse_gevp_kind(j.value("kind", "user"));
  inst.seed = j.value("seed", std::uint64_t{0});
  inst.validate();
  return inst;
}

CcaInstance load_cca_instance(const std::filesystem::path& dir) {
  const json j = read_manifest(dir);
  if (j.value("problem", "") != "cca") throw FormatError("manifest is not a CCA bundle");
  CcaInstance inst;
  inst.cx = read_matrix_market(dir / "Cx.mtx");
  inst.cy = read_matrix_market(dir / "Cy.mtx");
  inst.cxy = read_matrix_market(dir / "Cxy.mtx");
  const auto mu = j.at("N").get<std::vector<double>>();
  inst.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Index>(mu.size()));
  inst.seed = j.value("seed", std::uint64_t{0});
  inst.validate();
  return inst;
}

}  // namespace gstiefel
