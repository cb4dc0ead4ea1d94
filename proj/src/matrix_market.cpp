#include "gstiefel/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace gstiefel {

namespace {

enum class Symmetry { General, Symmetric, SkewSymmetric };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Next line that is neither blank nor a comment.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

void mirror(Matrix& m, Index i, Index j, double v, Symmetry sym) {
  if (i == j) return;
  if (sym == Symmetry::Symmetric) m(j, i) = v;
  if (sym == Symmetry::SkewSymmetric) m(j, i) = -v;
}

}  // namespace

Matrix read_matrix_market(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty MatrixMarket stream");

  std::istringstream hs(header);
  std::string banner, object, layout, field, symmetry;
  hs >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw FormatError("missing %%MatrixMarket matrix banner");
  layout = lower(layout);
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double")
    throw FormatError("unsupported MatrixMarket field: " + field);

  Symmetry sym = Symmetry::General;
  if (symmetry == "symmetric") sym = Symmetry::Symmetric;
  else if (symmetry == "skew-symmetric") sym = Symmetry::SkewSymmetric;
  else if (symmetry != "general")
    throw FormatError("unsupported MatrixMarket symmetry: " + symmetry);

  std::string line;
  if (!next_data_line(in, line)) throw FormatError("missing size line");
  std::istringstream size_line(line);

  if (layout == "coordinate") {
    long rows = 0, cols = 0, nnz = 0;
    if (!(size_line >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
      throw FormatError("bad coordinate size line");
    Matrix m = Matrix::Zero(rows, cols);
    for (long k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line)) throw FormatError("truncated entry list");
      std::istringstream es(line);
      long i = 0, j = 0;
      double v = 0.0;
      if (!(es >> i >> j >> v)) throw FormatError("bad entry: " + line);
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw FormatError("entry index out of range: " + line);
      m(i - 1, j - 1) = v;
      mirror(m, i - 1, j - 1, v, sym);
    }
    return m;
  }

  if (layout == "array") {
    long rows = 0, cols = 0;
    if (!(size_line >> rows >> cols) || rows <= 0 || cols <= 0)
      throw FormatError("bad array size line");
    Matrix m = Matrix::Zero(rows, cols);
    auto read_value = [&]() {
      if (!next_data_line(in, line)) throw FormatError("truncated array data");
      std::istringstream vs(line);
      double v = 0.0;
      if (!(vs >> v)) throw FormatError("bad array value: " + line);
      return v;
    };
    // Column-major; symmetric variants store the lower triangle only.
    for (long j = 0; j < cols; ++j) {
      const long i0 = sym == Symmetry::General ? 0
                      : sym == Symmetry::Symmetric ? j
                                                   : j + 1;
      for (long i = i0; i < rows; ++i) {
        const double v = read_value();
        m(i, j) = v;
        mirror(m, i, j, v, sym);
      }
    }
    return m;
  }

  throw FormatError("unsupported MatrixMarket layout: " + layout);
}

Matrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const Matrix& m) {
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(17);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << m(i, j) << '\n';
}

void write_matrix_market(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_matrix_market(out, m);
}

}  // namespace gstiefel
