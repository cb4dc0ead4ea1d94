#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gstiefel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Seeded generator used for every random draw in the library.
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A factorization or solve failed (matrix not SPD, not symmetric, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Rank deficiency or a zero vector where a nonzero one is required.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// The Cayley (or Gram) system for this step length is singular. Recoverable:
/// the line search treats it as a failed trial and shrinks the step.
class StepTooLargeError : public Error {
 public:
  using Error::Error;
};

/// Standard-normal matrix of the given shape, drawn column-major.
inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

inline Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }
inline Matrix skew(const Matrix& a) { return 0.5 * (a - a.transpose()); }

}  // namespace gstiefel
