#pragma once

#include <vector>

namespace ordreg {

/// Gauss-Hermite rule for the weight exp(-x^2): sum_j w_j g(x_j) approximates
/// the integral of g(x) exp(-x^2) over the real line.
struct GaussHermiteRule {
  std::vector<double> nodes;        // ascending
  std::vector<double> log_weights;  // natural log of w_j
};

/// Rule with `n` nodes, 1 <= n <= 200.
GaussHermiteRule gauss_hermite(int n);

}  // namespace ordreg
