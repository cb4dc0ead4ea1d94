#pragma once

// Minimal MatrixMarket (.mtx) support for dense matrices: coordinate and
// array layouts, real or integer fields, general/symmetric/skew-symmetric
// symmetry. Pattern and complex files are rejected.

#include <filesystem>
#include <iosfwd>

#include "gstiefel/types.hpp"

namespace gstiefel {

class FormatError : public Error {
 public:
  using Error::Error;
};

Matrix read_matrix_market(std::istream& in);
Matrix read_matrix_market(const std::filesystem::path& path);

/// Writes `array real general` with round-trip precision.
void write_matrix_market(std::ostream& out, const Matrix& m);
void write_matrix_market(const std::filesystem::path& path, const Matrix& m);

}  // namespace gstiefel
