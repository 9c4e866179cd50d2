#include "ordreg/clmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ordreg/errors.hpp"
#include "ordreg/optimize.hpp"

namespace ordreg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinProbability = 1e-300;
constexpr double kModeTolerance = 1e-10;
const double kLogSigmaFloor = std::log(1e-6);

double sorted_compensated_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0, carry = 0;
  for (double x : values) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double log_sum_exp(const std::vector<double>& terms) {
  double top = -kInf;
  for (double t : terms) top = std::max(top, t);
  if (!std::isfinite(top)) return top;
  double acc = 0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

void check_nodes(int nodes) {
  if (nodes < 1 || nodes > 101 || nodes % 2 == 0) {
    throw ValidationError("quadrature nodes must be an odd count between 1 and 101, got " +
                          std::to_string(nodes));
  }
}

const GaussHermiteRule& cached_rule(int nodes) {
  static const std::vector<GaussHermiteRule> rules = [] {
    std::vector<GaussHermiteRule> out(102);
    for (int n = 1; n <= 101; n += 2) out[static_cast<std::size_t>(n)] = gauss_hermite(n);
    return out;
  }();
  return rules[static_cast<std::size_t>(nodes)];
}

}  // namespace

ClmmLikelihood::ClmmLikelihood(const Design& design, std::span<const std::size_t> responses,
                               std::size_t categories, const FactorColumn& group, Link link)
    : design_(design),
      responses_(responses.begin(), responses.end()),
      members_(group.factor.size()),
      labels_(group.factor.levels()),
      link_(link) {
  if (categories < 2) throw ValidationError("at least two response categories are required");
  if (design.scale.size() > 0 || design.nominal.size() > 0) {
    throw ValidationError("mixed models support location terms only");
  }
  if (group.codes.size() != responses_.size()) {
    throw ValidationError("group codes must cover every row");
  }
  layout_.thresholds = categories - 1;
  layout_.location = static_cast<std::size_t>(design.location.size());
  for (std::size_t i = 0; i < group.codes.size(); ++i) members_.at(group.codes[i]).push_back(i);
}

std::size_t ClmmLikelihood::observed_groups() const {
  return static_cast<std::size_t>(std::count_if(
      members_.begin(), members_.end(), [](const auto& m) { return !m.empty(); }));
}

bool ClmmLikelihood::group_terms(std::size_t g, const Eigen::VectorXd& eta,
                                 const Eigen::VectorXd& tau, double sigma, double u,
                                 GroupTerms& out, bool derivatives) const {
  const auto J = static_cast<std::size_t>(tau.size());
  const double b = sigma * u;
  double nll = 0, d1 = 0, d2 = 0;
  for (auto i : members_[g]) {
    const std::size_t c = responses_[i];
    const double shift = eta(static_cast<Eigen::Index>(i)) + b;
    const double z_u = c < J ? tau(static_cast<Eigen::Index>(c)) - shift : kInf;
    const double z_l = c > 0 ? tau(static_cast<Eigen::Index>(c - 1)) - shift : -kInf;
    const double prob = link_.interval_probability(z_l, z_u);
    if (!(prob > kMinProbability)) return false;
    nll -= std::log(prob);
    if (!derivatives) continue;
    const double f_u = std::isfinite(z_u) ? link_.density(z_u) : 0.0;
    const double f_l = std::isfinite(z_l) ? link_.density(z_l) : 0.0;
    const double fp_u = std::isfinite(z_u) ? link_.density_derivative(z_u) : 0.0;
    const double fp_l = std::isfinite(z_l) ? link_.density_derivative(z_l) : 0.0;
    // derivatives of log P with respect to b
    const double first = (f_l - f_u) / prob;
    const double second = (fp_u - fp_l) / prob - first * first;
    d1 += first;
    d2 += second;
  }
  out.h = nll + 0.5 * u * u;
  out.h1 = -sigma * d1 + u;
  out.h2 = -sigma * sigma * d2 + 1.0;
  return true;
}

double ClmmLikelihood::group_mode(std::size_t g, const Eigen::VectorXd& eta,
                                  const Eigen::VectorXd& tau, double sigma,
                                  GroupTerms& at_mode) const {
  double u = 0;
  if (!group_terms(g, eta, tau, sigma, u, at_mode, true)) {
    throw ConvergenceError("random-effect mode for group '" + labels_[g] +
                               "': a response has zero probability at b = 0",
                           0, kInf, kInf);
  }
  for (int it = 0; it < 200; ++it) {
    if (std::abs(at_mode.h1) < kModeTolerance) return u;
    ++inner_iterations_;
    const double step = -at_mode.h1 / std::max(at_mode.h2, 1e-12);
    double t = 1.0;
    GroupTerms trial;
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      if (group_terms(g, eta, tau, sigma, u + t * step, trial, true) &&
          trial.h <= at_mode.h + 1e-14 * std::abs(at_mode.h)) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
    u += t * step;
    at_mode = trial;
  }
  if (std::abs(at_mode.h1) < 1e-8) return u;
  throw ConvergenceError("random-effect mode for group '" + labels_[g] +
                             "' did not converge (|dh/du| = " + std::to_string(at_mode.h1) + ")",
                         200, std::abs(at_mode.h1), at_mode.h);
}

bool ClmmLikelihood::group_partials(std::size_t g, const Eigen::VectorXd& eta,
                                    const Eigen::VectorXd& tau, double b, bool third,
                                    GroupPartials& out) const {
  const auto J = static_cast<Eigen::Index>(tau.size());
  const Eigen::Index n = J + static_cast<Eigen::Index>(layout_.location);
  out.d1 = Eigen::VectorXd::Zero(n);
  if (third) {
    out.d2 = Eigen::VectorXd::Zero(n);
    out.d3 = Eigen::VectorXd::Zero(n);
  }
  out.s1 = out.s2 = out.s3 = out.log_p = 0;
  const auto& X = design_.location.matrix;
  for (auto i : members_[g]) {
    const auto c = static_cast<Eigen::Index>(responses_[i]);
    const auto r = static_cast<Eigen::Index>(i);
    const double shift = eta(r) + b;
    const double z_u = c < J ? tau(c) - shift : kInf;
    const double z_l = c > 0 ? tau(c - 1) - shift : -kInf;
    const double prob = link_.interval_probability(z_l, z_u);
    if (!(prob > kMinProbability)) return false;
    out.log_p += std::log(prob);
    const bool up = std::isfinite(z_u), lo = std::isfinite(z_l);
    const double f_u = up ? link_.density(z_u) / prob : 0.0;
    const double f_l = lo ? link_.density(z_l) / prob : 0.0;
    const double first = f_l - f_u;
    out.s1 += first;
    for (Eigen::Index j = 0; j < X.cols(); ++j) out.d1(J + j) += X(r, j) * first;
    if (up) out.d1(c) += f_u;
    if (lo) out.d1(c - 1) -= f_l;
    if (!third) continue;
    const double q_u = up ? link_.density_derivative(z_u) / prob : 0.0;
    const double q_l = lo ? link_.density_derivative(z_l) / prob : 0.0;
    const double r_u = up ? link_.density_second_derivative(z_u) / prob : 0.0;
    const double r_l = lo ? link_.density_second_derivative(z_l) / prob : 0.0;
    const double second = (q_u - q_l) - first * first;
    const double third_b = -(r_u - r_l) - (q_u - q_l) * first - 2.0 * first * second;
    out.s2 += second;
    out.s3 += third_b;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      out.d2(J + j) += X(r, j) * second;
      out.d3(J + j) += X(r, j) * third_b;
    }
    // a threshold enters through one bound with density ratio a, slope q, curvature r
    auto add = [&](Eigen::Index k, double a, double q, double rr) {
      out.d2(k) += -q - a * first;
      out.d3(k) += rr + 2.0 * q * first + a * (first * first - second);
    };
    if (up) add(c, f_u, q_u, r_u);
    if (lo) add(c - 1, -f_l, -q_l, -r_l);
  }
  return true;
}

double ClmmLikelihood::value(const Eigen::VectorXd& fixed, double sigma, int nodes,
                             std::vector<double>* modes) const {
  return evaluate(fixed, sigma, nodes, modes, nullptr);
}

double ClmmLikelihood::value_and_gradient(const Eigen::VectorXd& fixed, double sigma, int nodes,
                                          Eigen::VectorXd& gradient) const {
  return evaluate(fixed, sigma, nodes, nullptr, &gradient);
}

double ClmmLikelihood::evaluate(const Eigen::VectorXd& fixed, double sigma, int nodes,
                                std::vector<double>* modes, Eigen::VectorXd* gradient) const {
  check_nodes(nodes);
  const auto J = static_cast<Eigen::Index>(layout_.thresholds);
  const auto p = static_cast<Eigen::Index>(layout_.location);
  if (fixed.size() != J + p) {
    throw ValidationError("fixed-effect vector has " + std::to_string(fixed.size()) +
                          " entries, the model needs " + std::to_string(J + p));
  }
  if (!(sigma >= 0) || !std::isfinite(sigma)) {
    throw ValidationError("random-intercept SD must be finite and >= 0");
  }
  if (gradient) *gradient = Eigen::VectorXd::Zero(J + p + 1);
  const Eigen::VectorXd tau = fixed.head(J);
  for (Eigen::Index k = 1; k < J; ++k) {
    if (!(tau(k) > tau(k - 1))) return kInf;
  }
  const Eigen::VectorXd eta = design_.location.matrix * fixed.tail(p);
  const GaussHermiteRule* rule = nodes > 1 ? &cached_rule(nodes) : nullptr;

  if (modes) modes->assign(members_.size(), 0.0);
  std::vector<double> parts;
  parts.reserve(members_.size());
  std::vector<double> terms;
  std::vector<GroupPartials> at_nodes;
  const double s2 = sigma * sigma, s3 = s2 * sigma;
  for (std::size_t g = 0; g < members_.size(); ++g) {
    if (members_[g].empty()) continue;
    GroupTerms at;
    const double u = group_mode(g, eta, tau, sigma, at);
    if (modes) (*modes)[g] = sigma * u;

    GroupPartials mode;
    Eigen::VectorXd du, dh2;  // over (fixed, log sigma)
    if (gradient) {
      if (!group_partials(g, eta, tau, sigma * u, true, mode)) return kInf;
      const Eigen::Index n = J + p + 1;
      Eigen::VectorXd h1(n), h2(n);
      h1.head(n - 1) = -sigma * mode.d2;
      h2.head(n - 1) = -s2 * mode.d3;
      h1(n - 1) = -sigma * mode.s1 - s2 * u * mode.s2;
      h2(n - 1) = -2.0 * s2 * mode.s2 - s3 * u * mode.s3;
      du = -h1 / at.h2;
      dh2 = h2 + (-s3 * mode.s3) * du;
    }

    if (!rule) {
      parts.push_back(at.h + 0.5 * std::log(at.h2));
      if (gradient) {
        gradient->head(J + p) -= mode.d1;
        (*gradient)(J + p) -= sigma * u * mode.s1;
        *gradient += 0.5 * dh2 / at.h2;
      }
      continue;
    }
    const double spread = std::sqrt(2.0 / at.h2);
    terms.assign(rule->nodes.size(), -kInf);
    if (gradient) at_nodes.assign(rule->nodes.size(), GroupPartials{});
    for (std::size_t j = 0; j < rule->nodes.size(); ++j) {
      const double x = rule->nodes[j];
      const double uj = u + spread * x;
      if (gradient) {
        if (group_partials(g, eta, tau, sigma * uj, false, at_nodes[j])) {
          terms[j] = rule->log_weights[j] + x * x + at_nodes[j].log_p - 0.5 * uj * uj;
        }
        continue;
      }
      GroupTerms node;
      if (group_terms(g, eta, tau, sigma, uj, node, false)) {
        terms[j] = rule->log_weights[j] + x * x - node.h;
      }
    }
    const double lse = log_sum_exp(terms);
    parts.push_back(-lse - 0.5 * std::log(2.0 / at.h2) + 0.5 * std::log(2.0 * std::numbers::pi));
    if (!gradient) continue;
    const Eigen::VectorXd dspread = -0.5 * spread * dh2 / at.h2;
    for (std::size_t j = 0; j < rule->nodes.size(); ++j) {
      if (!std::isfinite(terms[j])) continue;
      const double weight = std::exp(terms[j] - lse);
      const double x = rule->nodes[j];
      const double uj = u + spread * x;
      const GroupPartials& q = at_nodes[j];
      const double slope = -sigma * q.s1 + uj;
      gradient->head(J + p) -= weight * q.d1;
      (*gradient)(J + p) -= weight * sigma * uj * q.s1;
      *gradient += weight * slope * (du + x * dspread);
    }
    *gradient += 0.5 * dh2 / at.h2;
  }
  return sorted_compensated_sum(std::move(parts));
}

namespace {

struct PreparedClmm {
  Dataset data;
  Design design;
  std::vector<std::string> warnings;
};

PreparedClmm prepare(const ModelSpec& spec, const Dataset& data) {
  if (!spec.group) throw ValidationError("the model has no random term (1|group)");
  if (!spec.scale.empty() || !spec.nominal.empty()) {
    throw ValidationError("scale and nominal terms are not supported with a random term");
  }
  if (!data.group() || data.group()->factor.name() != *spec.group) {
    throw ValidationError("dataset has no grouping column '" + *spec.group + "'");
  }
  auto dropped = drop_unobserved_boundary_categories(data);
  if (!dropped.weak_categories.empty()) {
    throw ValidationError("interior category '" +
                          dropped.data.scale().label(dropped.weak_categories.front()) +
                          "' has no observations, so its thresholds are not identified; "
                          "collapse it into a neighbouring category");
  }
  Design design = build_design(spec, dropped.data);
  return {std::move(dropped.data), std::move(design), std::move(dropped.warnings)};
}

}  // namespace

double marginal_nll_laplace(const ModelSpec& spec, const Dataset& data,
                            const Eigen::VectorXd& fixed, double sigma) {
  return marginal_nll_agq(spec, data, fixed, sigma, 1);
}

double marginal_nll_agq(const ModelSpec& spec, const Dataset& data, const Eigen::VectorXd& fixed,
                        double sigma, int nodes) {
  if (!spec.group) throw ValidationError("the model has no random term (1|group)");
  if (!data.group()) throw ValidationError("dataset has no grouping column");
  const Design design = build_design(spec, data);
  const ClmmLikelihood lik(design, data.responses(), data.scale().size(), *data.group(),
                           spec.link);
  return lik.value(fixed, sigma, nodes);
}

FittedClmm fit_clmm(const ModelSpec& spec, const Dataset& data, const ClmmOptions& options) {
  check_nodes(options.nodes);
  auto prepared = prepare(spec, data);
  const Dataset& fit_data = prepared.data;
  const ClmmLikelihood lik(prepared.design, fit_data.responses(), fit_data.scale().size(),
                           *fit_data.group(), spec.link);
  if (lik.observed_groups() < 2) throw ValidationError("a random intercept needs at least 2 groups");
  if (options.fixed_sigma && !(*options.fixed_sigma >= 0)) {
    throw ValidationError("fixed random-intercept SD must be >= 0");
  }
  const auto& L = lik.layout();
  const auto nfixed = static_cast<Eigen::Index>(L.thresholds + L.location);
  const bool free_sigma = !options.fixed_sigma;
  const Eigen::Index n = nfixed + (free_sigma ? 1 : 0);

  Eigen::VectorXd x0(n);
  if (options.start) {
    if (options.start->size() != nfixed + 1) {
      throw ValidationError("start vector has the wrong length");
    }
    x0 = options.start->head(n);
  } else {
    ModelSpec flat = spec;
    flat.group.reset();
    try {
      x0.head(nfixed) = fit_clm(flat, fit_data).estimates;
    } catch (const Error&) {
      x0.setZero();
      x0.head(static_cast<Eigen::Index>(L.thresholds)) = starting_thresholds(fit_data, spec.link);
    }
    if (free_sigma) x0(nfixed) = 0.0;
  }

  auto sigma_of = [&](const Eigen::VectorXd& x) {
    return free_sigma ? std::exp(std::max(x(nfixed), kLogSigmaFloor)) : *options.fixed_sigma;
  };
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (!g) return lik.value(x.head(nfixed), sigma_of(x), options.nodes);
    Eigen::VectorXd full;
    const double v = lik.value_and_gradient(x.head(nfixed), sigma_of(x), options.nodes, full);
    *g = full.head(n);
    return v;
  };
  if (!std::isfinite(objective(x0, nullptr))) throw ValidationError("infeasible starting values");

  OptimizerOptions opt;
  opt.tolerance = options.tolerance;
  opt.max_iterations = options.max_iterations;
  if (free_sigma) {
    Eigen::VectorXd lower = Eigen::VectorXd::Constant(n, -kInf);
    lower(nfixed) = kLogSigmaFloor;
    opt.lower_bounds = lower;
  }
  auto run = bfgs_minimize(objective, x0, opt);

  auto at_floor = [&](const Eigen::VectorXd& x) {
    return free_sigma && x(nfixed) <= kLogSigmaFloor + 1e-12;
  };
  auto gradient_at = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(n);
    objective(x, &g);
    if (at_floor(x) && g(nfixed) > 0) g(nfixed) = 0;
    return g;
  };
  // Hessian by central differences of the analytic gradient over the first m coordinates.
  auto hessian_at = [&](const Eigen::VectorXd& x, Eigen::Index m) {
    Eigen::MatrixXd h(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double step = 1e-5 * std::max(1.0, std::abs(x(j)));
      Eigen::VectorXd up = x, down = x, gu(n), gd(n);
      up(j) += step;
      down(j) -= step;
      objective(up, &gu);
      objective(down, &gd);
      h.col(j) = (gu - gd).head(m) / (2 * step);
    }
    return Eigen::MatrixXd(0.5 * (h + h.transpose()));
  };

  Eigen::VectorXd x = run.x;
  double value = run.value;
  Eigen::VectorXd g = gradient_at(x);
  int iterations = run.iterations;
  for (int k = 0; k < 20 && g.cwiseAbs().maxCoeff() >= options.tolerance; ++k) {
    const Eigen::Index m = at_floor(x) && g(nfixed) == 0 ? nfixed : n;
    const Eigen::MatrixXd h = hessian_at(x, m);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) break;
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
    step.head(m) = -llt.solve(g.head(m));
    double t = 1.0;
    bool moved = false;
    for (int j = 0; j < 30; ++j) {
      Eigen::VectorXd trial = x + t * step;
      if (free_sigma) trial(nfixed) = std::max(trial(nfixed), kLogSigmaFloor);
      const double v = objective(trial, nullptr);
      if (!std::isfinite(v)) {
        t *= 0.5;
        continue;
      }
      // near the optimum the value is flat to rounding, so judge by the gradient
      const bool flat = std::abs(v - value) <= 1e-13 * std::max(1.0, std::abs(value));
      const Eigen::VectorXd g_trial = gradient_at(trial);
      if (v <= value || (flat && g_trial.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff())) {
        x = trial;
        value = v;
        g = g_trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
    ++iterations;
    run.trace.push_back(value);
  }
  const double max_grad = g.cwiseAbs().maxCoeff();
  if (!(max_grad < options.tolerance)) {
    throw ConvergenceError("mixed-model fit did not reach max |gradient| < " +
                               std::to_string(options.tolerance) + " within " +
                               std::to_string(options.max_iterations) + " iterations",
                           iterations, max_grad, value);
  }

  const double sigma = sigma_of(x);
  bool boundary = false;
  if (free_sigma) {
    const double at_zero = lik.value(x.head(nfixed), 0.0, options.nodes);
    boundary = x(nfixed) <= kLogSigmaFloor + 1e-8 || at_zero - value < 1e-6;
  }
  const bool sigma_in_hessian = free_sigma && !boundary;
  const Eigen::MatrixXd h = hessian_at(x, sigma_in_hessian ? n : nfixed);
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw ConvergenceError("Hessian is not positive definite at the optimum", iterations,
                           max_grad, value);
  }
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
  cov = (0.5 * (cov + cov.transpose())).eval();

  FittedClmm out{FittedClm{spec,
                           fit_data.scale(),
                           prepared.design.location.terms,
                           {},
                           {},
                           L,
                           parameter_names(L, fit_data.scale(), prepared.design),
                           x.head(nfixed),
                           cov.topLeftCorner(nfixed, nfixed),
                           -value}};
  FittedClm& fx = out.fixed;
  const double npar = static_cast<double>(nfixed) + (free_sigma ? 1.0 : 0.0);
  fx.aic = 2.0 * npar - 2.0 * fx.log_lik;
  fx.n_obs = fit_data.rows();
  fx.convergence.iterations = iterations;
  fx.convergence.step_halvings = run.halvings;
  fx.convergence.inner_iterations = lik.inner_iterations();
  fx.convergence.max_abs_gradient = max_grad;
  fx.convergence.condition_number = condition_number(h);
  fx.convergence.boundary = boundary;
  fx.convergence.trace = run.trace;
  fx.warnings = std::move(prepared.warnings);
  if (boundary) {
    fx.warnings.push_back("random-intercept SD is at the boundary (sigma = 0)");
  }

  out.group = *spec.group;
  out.group_levels = fit_data.group()->factor.levels();
  out.sigma = sigma;
  out.sigma_fixed = !free_sigma;
  out.sigma_se = sigma_in_hessian ? sigma * std::sqrt(std::max(0.0, cov(nfixed, nfixed)))
                                  : std::numeric_limits<double>::quiet_NaN();
  out.full_covariance = cov;
  out.nodes = options.nodes;
  out.group_count = lik.observed_groups();
  lik.value(fx.estimates, sigma, options.nodes, &out.modes);
  return out;
}

const std::vector<double>& conditional_modes(const FittedClmm& fitted) { return fitted.modes; }

std::vector<double> recompute_conditional_modes(const FittedClmm& fitted, const Dataset& data) {
  auto prepared = prepare(fitted.fixed.spec, data);
  const ClmmLikelihood lik(prepared.design, prepared.data.responses(),
                           prepared.data.scale().size(), *prepared.data.group(),
                           fitted.fixed.spec.link);
  if (lik.layout() != fitted.fixed.layout) {
    throw ValidationError("data do not match the fitted model's parameter layout");
  }
  std::vector<double> modes;
  lik.value(fitted.fixed.estimates, fitted.sigma, fitted.nodes, &modes);
  return modes;
}

}  // namespace ordreg
