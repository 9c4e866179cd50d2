#include "ordreg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ordreg/errors.hpp"

namespace ordreg {

// Newton iteration on the orthonormal Hermite recurrence, seeded with the
// usual asymptotic guesses for the largest roots and extrapolation inwards.
GaussHermiteRule gauss_hermite(int n) {
  if (n < 1 || n > 200) throw ValidationError("Gauss-Hermite node count must be in 1..200");
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  double z = 0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];
    }
    double pp = 0;
    bool converged = false;
    for (int its = 0; its < 100; ++its) {
      double p1 = pim4, p2 = 0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error("Gauss-Hermite root " + std::to_string(i) + " did not converge");
    }
    x[static_cast<std::size_t>(i)] = z;
    x[static_cast<std::size_t>(n - 1 - i)] = -z;
    w[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
    w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
  }
  if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
  GaussHermiteRule rule;
  for (int i = n - 1; i >= 0; --i) {
    rule.nodes.push_back(x[static_cast<std::size_t>(i)]);
    rule.log_weights.push_back(std::log(w[static_cast<std::size_t>(i)]));
  }
  return rule;
}

}  // namespace ordreg
