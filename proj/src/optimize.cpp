#include "ordreg/optimize.hpp"

#include <cmath>
#include <limits>

namespace ordreg {
namespace {

constexpr double kArmijo = 1e-4;

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// A non-increase too small to separate from rounding.
bool within_roundoff(double candidate, double current) {
  return candidate <= current &&
         current - candidate <= 64 * std::numeric_limits<double>::epsilon() *
                                              std::max(1.0, std::abs(current));
}

void bfgs_update_inverse(Eigen::MatrixXd& hinv, const Eigen::VectorXd& s,
                         const Eigen::VectorXd& y) {
  const double sy = s.dot(y);
  if (!(sy > 1e-12 * s.norm() * y.norm())) return;
  const double rho = 1.0 / sy;
  const Eigen::Index n = s.size();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd left = I - rho * s * y.transpose();
  hinv = left * hinv * left.transpose() + rho * s * s.transpose();
}

void bfgs_update_direct(Eigen::MatrixXd& b, const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  const double sy = s.dot(y);
  if (!(sy > 1e-12 * s.norm() * y.norm())) return;
  const Eigen::VectorXd bs = b * s;
  b += y * y.transpose() / sy - bs * bs.transpose() / s.dot(bs);
}

}  // namespace

OptimizerResult newton_minimize(const SecondOrderObjective& objective, Eigen::VectorXd x0,
                                const OptimizerOptions& options) {
  OptimizerResult result;
  const Eigen::Index n = x0.size();
  Eigen::VectorXd g(n);
  Eigen::MatrixXd h(n, n);
  result.x = std::move(x0);
  result.value = objective(result.x, &g, &h);
  result.trace.push_back(result.value);
  if (!std::isfinite(result.value)) {
    result.gradient = g;
    return result;
  }
  std::optional<Eigen::MatrixXd> fallback;

  for (;;) {
    if (max_abs(g) < options.tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;

    Eigen::VectorXd direction;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() == Eigen::Success) {
      direction = -llt.solve(g);
    } else {
      if (!fallback) {
        fallback = Eigen::MatrixXd(h.diagonal().cwiseAbs().cwiseMax(1.0).asDiagonal());
      }
      Eigen::LLT<Eigen::MatrixXd> qn(*fallback);
      direction = qn.info() == Eigen::Success ? Eigen::VectorXd(-qn.solve(g)) : Eigen::VectorXd(-g);
    }
    double slope = g.dot(direction);
    if (!(slope < 0)) {
      direction = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double candidate_value = 0;
    for (int k = 0; k <= options.max_halvings; ++k) {
      candidate = result.x + step * direction;
      candidate_value = objective(candidate, nullptr, nullptr);
      if (std::isfinite(candidate_value) &&
          candidate_value <= result.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      if (within_roundoff(candidate_value, result.value)) {
        Eigen::VectorXd probe(n);
        objective(candidate, &probe, nullptr);
        if (max_abs(probe) < max_abs(g)) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
      ++result.halvings;
    }
    if (!accepted) break;

    Eigen::VectorXd g_new(n);
    Eigen::MatrixXd h_new(n, n);
    candidate_value = objective(candidate, &g_new, &h_new);
    if (fallback) bfgs_update_direct(*fallback, candidate - result.x, g_new - g);
    result.x = std::move(candidate);
    result.value = candidate_value;
    g = std::move(g_new);
    h = std::move(h_new);
    ++result.iterations;
    result.trace.push_back(result.value);
    if (options.on_iterate) options.on_iterate(result.x, result.value);
  }
  result.gradient = g;
  return result;
}

OptimizerResult bfgs_minimize(const FirstOrderObjective& objective, Eigen::VectorXd x0,
                              const OptimizerOptions& options) {
  OptimizerResult result;
  const Eigen::Index n = x0.size();
  auto project = [&](Eigen::VectorXd& x) {
    if (options.lower_bounds) x = x.cwiseMax(*options.lower_bounds);
  };
  auto free_gradient = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    Eigen::VectorXd out = g;
    if (options.lower_bounds) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (x(j) <= (*options.lower_bounds)(j) && g(j) > 0) out(j) = 0;
      }
    }
    return out;
  };

  project(x0);
  result.x = std::move(x0);
  Eigen::VectorXd g(n);
  result.value = objective(result.x, &g);
  result.trace.push_back(result.value);
  if (!std::isfinite(result.value)) {
    result.gradient = g;
    return result;
  }
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;

  for (;;) {
    Eigen::VectorXd gf = free_gradient(result.x, g);
    if (max_abs(gf) < options.tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;

    Eigen::VectorXd direction = -hinv * gf;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (gf(j) == 0 && g(j) != 0) direction(j) = 0;
    }
    if (!(gf.dot(direction) < 0)) {
      hinv.setIdentity();
      fresh = true;
      direction = -gf;
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double candidate_value = 0;
    for (int k = 0; k <= options.max_halvings; ++k) {
      candidate = result.x + step * direction;
      project(candidate);
      if (candidate == result.x) break;
      candidate_value = objective(candidate, nullptr);
      const double decrease = g.dot(candidate - result.x);
      if (std::isfinite(candidate_value) && candidate_value <= result.value + kArmijo * decrease) {
        accepted = true;
        break;
      }
      if (within_roundoff(candidate_value, result.value)) {
        Eigen::VectorXd probe(n);
        objective(candidate, &probe);
        if (max_abs(free_gradient(candidate, probe)) < max_abs(gf)) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
      ++result.halvings;
    }
    if (!accepted) {
      if (fresh) break;
      hinv.setIdentity();
      fresh = true;
      continue;
    }

    Eigen::VectorXd g_new(n);
    candidate_value = objective(candidate, &g_new);
    const Eigen::VectorXd s = candidate - result.x;
    const Eigen::VectorXd y = g_new - g;
    if (fresh && s.dot(y) > 0) hinv *= s.dot(y) / y.squaredNorm();
    bfgs_update_inverse(hinv, s, y);
    fresh = false;
    result.x = std::move(candidate);
    result.value = candidate_value;
    g = std::move(g_new);
    ++result.iterations;
    result.trace.push_back(result.value);
    if (options.on_iterate) options.on_iterate(result.x, result.value);
  }
  result.gradient = g;
  return result;
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double relative_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = relative_step * std::max(1.0, std::abs(x(j)));
    probe(j) = x(j) + h;
    const double up = f(probe);
    probe(j) = x(j) - h;
    const double down = f(probe);
    probe(j) = x(j);
    g(j) = (up - down) / (2 * h);
  }
  return g;
}

Eigen::MatrixXd numeric_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, double relative_step) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index j = 0; j < n; ++j) h(j) = relative_step * std::max(1.0, std::abs(x(j)));
  Eigen::MatrixXd out(n, n);
  const double f0 = f(x);
  Eigen::VectorXd p = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    p(j) = x(j) + h(j);
    const double up = f(p);
    p(j) = x(j) - h(j);
    const double down = f(p);
    p(j) = x(j);
    out(j, j) = (up - 2 * f0 + down) / (h(j) * h(j));
    for (Eigen::Index k = 0; k < j; ++k) {
      auto eval = [&](double sj, double sk) {
        p(j) = x(j) + sj * h(j);
        p(k) = x(k) + sk * h(k);
        const double v = f(p);
        p(j) = x(j);
        p(k) = x(k);
        return v;
      };
      const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4 * h(j) * h(k));
      out(j, k) = out(k, j) = v;
    }
  }
  return out;
}

double condition_number(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  if (lo == 0) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

}  // namespace ordreg
