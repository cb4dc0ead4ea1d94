#pragma once

// Self-check suite run by `gstiefel-cg check`: geometric identities of the
// retraction and transports, gradient consistency of both problems, and a
// small solve against its oracle.

#include <cstdint>
#include <string>
#include <vector>

#include "gstiefel/solver.hpp"

namespace gstiefel {

struct CheckOptions {
  Index n = 60;
  Index p = 4;
  std::uint64_t seed = 1;
  int samples = 20;
};

struct CheckResult {
  std::string name;
  double value = 0.0;      ///< worst observed residual
  double tolerance = 0.0;
  bool passed = false;
};

std::vector<CheckResult> run_property_suite(const CheckOptions& opts);

/// |FD - <grad f(X), xi>| / (||grad f(X)|| ||xi||), FD the central difference
/// of t -> f(R_X(t xi)) with step h, using the Cayley retraction.
double directional_derivative_error(const Problem& problem, const ProductPoint& x,
                                    const ProductTangent& xi, double h = 1e-4);

}  // namespace gstiefel
