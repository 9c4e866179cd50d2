#include "ordreg/clm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ordreg/errors.hpp"
#include "ordreg/optimize.hpp"

namespace ordreg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinProbability = 1e-300;

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0;
  double carry_ = 0;
};

}  // namespace

std::vector<double> category_probabilities(std::span<const double> tau, double eta, double alpha,
                                           std::span<const double> threshold_shift,
                                           const Link& link) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw ValidationError("category_probabilities: alpha must be positive and finite");
  }
  if (!std::isfinite(eta)) throw ValidationError("category_probabilities: eta must be finite");
  if (!threshold_shift.empty() && threshold_shift.size() != tau.size()) {
    throw ValidationError("category_probabilities: one threshold shift per threshold required");
  }
  std::vector<double> effective(tau.begin(), tau.end());
  for (std::size_t k = 0; k < effective.size(); ++k) {
    if (!threshold_shift.empty()) effective[k] += threshold_shift[k];
    if (!std::isfinite(effective[k])) {
      throw ValidationError("category_probabilities: thresholds must be finite");
    }
    if (k > 0 && !(effective[k] > effective[k - 1])) {
      throw ValidationError("thresholds out of order: threshold " + std::to_string(k) + " (" +
                            std::to_string(effective[k - 1]) + ") must be below threshold " +
                            std::to_string(k + 1) + " (" + std::to_string(effective[k]) + ")");
    }
  }
  std::vector<double> probs(effective.size() + 1);
  double lower = -kInf;
  for (std::size_t k = 0; k <= effective.size(); ++k) {
    const double upper = k < effective.size() ? alpha * (effective[k] - eta) : kInf;
    probs[k] = link.interval_probability(lower, upper);
    lower = upper;
  }
  return probs;
}

ClmLikelihood::ClmLikelihood(const Design& design, std::span<const std::size_t> responses,
                             std::size_t categories, Link link)
    : design_(design), responses_(responses.begin(), responses.end()), link_(link) {
  if (categories < 2) throw ValidationError("at least two response categories are required");
  layout_.thresholds = categories - 1;
  layout_.location = static_cast<std::size_t>(design.location.size());
  layout_.scale = static_cast<std::size_t>(design.scale.size());
  layout_.nominal = static_cast<std::size_t>(design.nominal.size());
  for (auto r : responses_) {
    if (r >= categories) throw ValidationError("response outside the scale");
  }
}

bool ClmLikelihood::thresholds_ordered(const Eigen::VectorXd& theta) const {
  for (std::size_t k = 1; k < layout_.thresholds; ++k) {
    if (!(theta(static_cast<Eigen::Index>(k)) > theta(static_cast<Eigen::Index>(k - 1)))) {
      return false;
    }
  }
  return true;
}

double ClmLikelihood::value(const Eigen::VectorXd& theta) const {
  return accumulate(theta, nullptr, nullptr, nullptr);
}

double ClmLikelihood::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient,
                               Eigen::MatrixXd* hessian) const {
  return accumulate(theta, gradient, hessian, nullptr);
}

Eigen::MatrixXd ClmLikelihood::row_scores(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd scores;
  if (!std::isfinite(accumulate(theta, nullptr, nullptr, &scores))) {
    throw ValidationError("row scores requested at an infeasible parameter vector");
  }
  return scores;
}

double ClmLikelihood::accumulate(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient,
                                 Eigen::MatrixXd* hessian, Eigen::MatrixXd* scores) const {
  const auto& L = layout_;
  const auto P = static_cast<Eigen::Index>(L.size());
  if (theta.size() != P) {
    throw ValidationError("parameter vector has " + std::to_string(theta.size()) +
                          " entries, the model needs " + std::to_string(P));
  }
  const auto J = static_cast<Eigen::Index>(L.thresholds);
  const auto p = static_cast<Eigen::Index>(L.location);
  const auto q = static_cast<Eigen::Index>(L.scale);
  const auto r = static_cast<Eigen::Index>(L.nominal);
  const auto loc0 = static_cast<Eigen::Index>(L.location_offset());
  const auto sc0 = static_cast<Eigen::Index>(L.scale_offset());
  const bool need_score = gradient || hessian || scores;

  if (gradient) gradient->setZero(P);
  if (hessian) hessian->setZero(P, P);
  if (scores) scores->setZero(static_cast<Eigen::Index>(rows()), P);
  if (r == 0 && !thresholds_ordered(theta)) return kInf;

  const Eigen::VectorXd tau = theta.head(J);
  const Eigen::VectorXd eta = design_.location.matrix * theta.segment(loc0, p);
  const Eigen::VectorXd log_alpha = design_.scale.matrix * theta.segment(sc0, q);
  Eigen::MatrixXd offsets;
  if (r > 0) {
    Eigen::MatrixXd gamma(r, J);
    for (Eigen::Index j = 0; j < r; ++j) {
      for (Eigen::Index k = 0; k < J; ++k) {
        gamma(j, k) = theta(static_cast<Eigen::Index>(
            L.nominal_index(static_cast<std::size_t>(j), static_cast<std::size_t>(k))));
      }
    }
    offsets = design_.nominal.matrix * gamma;
  }

  Eigen::VectorXd du(P), dl(P), score(P);
  CompensatedSum nll;
  const auto& X = design_.location.matrix;
  const auto& S = design_.scale.matrix;
  const auto& N = design_.nominal.matrix;

  // dz/dtheta for z = alpha * (tau_m + offset_m - eta).
  auto fill_dz = [&](Eigen::VectorXd& dz, Eigen::Index i, Eigen::Index m, double alpha,
                     double z) {
    dz.setZero();
    dz(m) = alpha;
    for (Eigen::Index j = 0; j < p; ++j) dz(loc0 + j) = -alpha * X(i, j);
    for (Eigen::Index j = 0; j < q; ++j) dz(sc0 + j) = z * S(i, j);
    for (Eigen::Index j = 0; j < r; ++j) {
      dz(static_cast<Eigen::Index>(
          L.nominal_index(static_cast<std::size_t>(j), static_cast<std::size_t>(m)))) =
          alpha * N(i, j);
    }
  };
  // Adds coef * d2z/dtheta2 (only the log-scale rows/columns are non-zero).
  auto add_second = [&](Eigen::Index i, const Eigen::VectorXd& dz, double z, double coef) {
    for (Eigen::Index a = 0; a < q; ++a) {
      const double sa = S(i, a);
      if (sa == 0) continue;
      for (Eigen::Index b = 0; b < q; ++b) (*hessian)(sc0 + a, sc0 + b) -= coef * z * sa * S(i, b);
      for (Eigen::Index b = 0; b < P; ++b) {
        if (b >= sc0 && b < sc0 + q) continue;
        const double v = coef * sa * dz(b);
        (*hessian)(sc0 + a, b) -= v;
        (*hessian)(b, sc0 + a) -= v;
      }
    }
  };

  std::vector<double> effective(static_cast<std::size_t>(J));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(rows()); ++i) {
    const auto c = static_cast<Eigen::Index>(responses_[static_cast<std::size_t>(i)]);
    const double alpha = std::exp(log_alpha(i));
    for (Eigen::Index k = 0; k < J; ++k) {
      effective[static_cast<std::size_t>(k)] = tau(k) + (r > 0 ? offsets(i, k) : 0.0);
      if (r > 0 && k > 0 && !(effective[static_cast<std::size_t>(k)] >
                              effective[static_cast<std::size_t>(k - 1)])) {
        return kInf;
      }
    }
    const bool has_upper = c < J;
    const bool has_lower = c > 0;
    const double z_u =
        has_upper ? alpha * (effective[static_cast<std::size_t>(c)] - eta(i)) : kInf;
    const double z_l =
        has_lower ? alpha * (effective[static_cast<std::size_t>(c - 1)] - eta(i)) : -kInf;
    if (std::isnan(z_u) || std::isnan(z_l)) return kInf;
    const double prob = link_.interval_probability(z_l, z_u);
    if (!(prob > kMinProbability)) return kInf;
    nll.add(-std::log(prob));
    if (!need_score) continue;

    score.setZero();
    double g_u = 0, g_l = 0;
    if (has_upper && std::isfinite(z_u)) {
      fill_dz(du, i, c, alpha, z_u);
      g_u = link_.density(z_u) / prob;
      score += g_u * du;
    }
    if (has_lower && std::isfinite(z_l)) {
      fill_dz(dl, i, c - 1, alpha, z_l);
      g_l = -link_.density(z_l) / prob;
      score += g_l * dl;
    }
    if (scores) scores->row(i) = score.transpose();
    if (gradient) *gradient -= score;
    if (hessian) {
      if (has_upper && std::isfinite(z_u)) {
        hessian->noalias() -= (link_.density_derivative(z_u) / prob) * du * du.transpose();
        if (q > 0) add_second(i, du, z_u, g_u);
      }
      if (has_lower && std::isfinite(z_l)) {
        hessian->noalias() += (link_.density_derivative(z_l) / prob) * dl * dl.transpose();
        if (q > 0) add_second(i, dl, z_l, g_l);
      }
      hessian->noalias() += score * score.transpose();
    }
  }
  return nll.value();
}

std::vector<std::string> parameter_names(const ParameterLayout& layout, const OrdinalScale& scale,
                                         const Design& design) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < layout.thresholds; ++k) names.push_back(scale.threshold_name(k));
  for (const auto& c : design.location.columns) names.push_back(c);
  for (const auto& c : design.scale.columns) names.push_back("scale." + c);
  for (const auto& c : design.nominal.columns) {
    for (std::size_t k = 0; k < layout.thresholds; ++k) {
      names.push_back(scale.threshold_name(k) + "." + c);
    }
  }
  return names;
}

double negative_log_likelihood(const ModelSpec& spec, const Dataset& data,
                               const Eigen::VectorXd& theta) {
  const Design design = build_design(spec, data);
  return ClmLikelihood(design, data.responses(), data.scale().size(), spec.link).value(theta);
}

Eigen::VectorXd nll_gradient(const ModelSpec& spec, const Dataset& data,
                             const Eigen::VectorXd& theta) {
  const Design design = build_design(spec, data);
  Eigen::VectorXd g;
  const double v = ClmLikelihood(design, data.responses(), data.scale().size(), spec.link)
                       .evaluate(theta, &g, nullptr);
  if (!std::isfinite(v)) throw ValidationError("gradient requested at an infeasible point");
  return g;
}

Eigen::VectorXd starting_thresholds(const Dataset& data, const Link& link) {
  const auto counts = data.category_counts();
  const double n = static_cast<double>(data.rows());
  Eigen::VectorXd tau(static_cast<Eigen::Index>(counts.size() - 1));
  double cumulative = 0;
  for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
    cumulative += static_cast<double>(counts[k]);
    tau(static_cast<Eigen::Index>(k)) = link.quantile(cumulative / n);
  }
  return tau;
}

Eigen::VectorXd FittedClm::thresholds() const {
  return estimates.head(static_cast<Eigen::Index>(layout.thresholds));
}

Eigen::VectorXd FittedClm::location() const {
  return estimates.segment(static_cast<Eigen::Index>(layout.location_offset()),
                           static_cast<Eigen::Index>(layout.location));
}

Eigen::VectorXd FittedClm::standard_errors() const {
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

std::optional<std::size_t> FittedClm::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

/// Separation leaves the likelihood still decreasing far along some ray.
/// Probe each coefficient axis and the flattest Hessian direction out to
/// the separation bound.
std::optional<std::string> detect_separation(const ClmLikelihood& lik, const Eigen::VectorXd& x,
                                             double value, const Eigen::MatrixXd& hessian,
                                             const std::vector<std::string>& names,
                                             double bound) {
  const auto& L = lik.layout();
  const double slack = 1e-9 * (1.0 + std::abs(value));
  auto still_decreasing = [&](const Eigen::VectorXd& direction) {
    const double reach = bound / std::max(direction.cwiseAbs().maxCoeff(), 1e-300);
    const double far = lik.value(x + reach * direction);
    return std::isfinite(far) && far <= value + slack;
  };
  for (std::size_t j = L.thresholds; j < L.size(); ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(x.size());
      d(static_cast<Eigen::Index>(j)) = sign;
      if (still_decreasing(d)) return names[j];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
  if (eig.info() == Eigen::Success) {
    const Eigen::VectorXd v = eig.eigenvectors().col(0);
    if (still_decreasing(v) || still_decreasing(-v)) {
      Eigen::Index j = 0;
      v.tail(v.size() - static_cast<Eigen::Index>(L.thresholds)).cwiseAbs().maxCoeff(&j);
      return names[L.thresholds + static_cast<std::size_t>(j)];
    }
  }
  return std::nullopt;
}

}  // namespace

FittedClm fit_clm(const ModelSpec& spec, const Dataset& data, const FitOptions& options) {
  if (spec.group) {
    throw ValidationError("the model has a random term (1|" + *spec.group +
                          "); fit it as a mixed model");
  }
  auto dropped = drop_unobserved_boundary_categories(data);
  if (!dropped.weak_categories.empty()) {
    const auto& label = dropped.data.scale().label(dropped.weak_categories.front());
    throw ValidationError("interior category '" + label +
                          "' has no observations, so its thresholds are not identified; "
                          "collapse it into a neighbouring category");
  }
  const Dataset& fit_data = dropped.data;
  const Design design = build_design(spec, fit_data);
  const ClmLikelihood lik(design, fit_data.responses(), fit_data.scale().size(), spec.link);
  const auto& L = lik.layout();
  const auto names = parameter_names(L, fit_data.scale(), design);

  Eigen::VectorXd x0;
  if (options.start) {
    x0 = *options.start;
    if (x0.size() != static_cast<Eigen::Index>(L.size())) {
      throw ValidationError("start vector has the wrong length");
    }
  } else {
    x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L.size()));
    x0.head(static_cast<Eigen::Index>(L.thresholds)) = starting_thresholds(fit_data, spec.link);
  }
  if (!std::isfinite(lik.value(x0))) throw ValidationError("infeasible starting values");

  OptimizerOptions opt;
  opt.tolerance = options.tolerance;
  opt.max_iterations = options.max_iterations;
  opt.on_iterate = [&](const Eigen::VectorXd& x, double value) {
    for (std::size_t j = L.thresholds; j < L.size(); ++j) {
      if (std::abs(x(static_cast<Eigen::Index>(j))) > options.separation_bound) {
        throw SeparationError("coefficient '" + names[j] + "' diverges (|estimate| > " +
                                  std::to_string(options.separation_bound) +
                                  "): the responses are separated",
                              0, 0, value);
      }
    }
  };
  const auto run = newton_minimize(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
        return lik.evaluate(x, g, h);
      },
      x0, opt);

  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  lik.evaluate(run.x, &g, &h);
  const double max_grad = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  if (auto column = detect_separation(lik, run.x, run.value, h, names, options.separation_bound)) {
    throw SeparationError("coefficient '" + *column +
                              "' diverges: the likelihood keeps increasing as it grows, "
                              "the responses are separated",
                          run.iterations, max_grad, run.value);
  }
  if (!run.converged) {
    throw ConvergenceError("fit did not reach max |gradient| < " +
                               std::to_string(options.tolerance) + " within " +
                               std::to_string(options.max_iterations) + " iterations",
                           run.iterations, max_grad, run.value);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw ConvergenceError("observed Hessian is not positive definite at the optimum",
                           run.iterations, max_grad, run.value);
  }

  FittedClm fit{spec,
                fit_data.scale(),
                design.location.terms,
                design.scale.terms,
                design.nominal.terms,
                L,
                names,
                run.x,
                llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols())),
                -run.value,
                0,
                fit_data.rows(),
                {},
                std::move(dropped.warnings)};
  fit.covariance = (0.5 * (fit.covariance + fit.covariance.transpose())).eval();
  fit.aic = 2.0 * static_cast<double>(L.size()) - 2.0 * fit.log_lik;
  fit.convergence.iterations = run.iterations;
  fit.convergence.step_halvings = run.halvings;
  fit.convergence.max_abs_gradient = max_grad;
  fit.convergence.condition_number = condition_number(h);
  fit.convergence.trace = run.trace;
  return fit;
}

namespace {

struct SettingPredictor {
  double eta = 0;
  double alpha = 1;
  std::vector<double> shift;  // nominal threshold offsets, empty without nominal terms
};

SettingPredictor predictor_for(const FittedClm& fitted, const CovariateSetting& setting) {
  CovariateSetting location, scale, nominal;
  for (const auto& [term, value] : setting) {
    auto has = [&](const std::vector<TermCoding>& terms) {
      return std::any_of(terms.begin(), terms.end(),
                         [&](const TermCoding& t) { return t.term == term; });
    };
    bool known = false;
    if (has(fitted.location_terms)) location[term] = value, known = true;
    if (has(fitted.scale_terms)) scale[term] = value, known = true;
    if (has(fitted.nominal_terms)) nominal[term] = value, known = true;
    if (!known) throw ValidationError("setting names unknown term '" + term + "'");
  }
  const auto& L = fitted.layout;
  const Eigen::VectorXd x = encode_setting(fitted.location_terms, location);
  const Eigen::VectorXd s = encode_setting(fitted.scale_terms, scale);
  const Eigen::VectorXd n = encode_setting(fitted.nominal_terms, nominal);
  SettingPredictor out;
  out.eta = x.dot(fitted.location());
  out.alpha = std::exp(s.dot(fitted.estimates.segment(
      static_cast<Eigen::Index>(L.scale_offset()), static_cast<Eigen::Index>(L.scale))));
  if (L.nominal > 0) {
    out.shift.assign(L.thresholds, 0.0);
    for (std::size_t j = 0; j < L.nominal; ++j) {
      for (std::size_t k = 0; k < L.thresholds; ++k) {
        out.shift[k] += n(static_cast<Eigen::Index>(j)) *
                        fitted.estimates(static_cast<Eigen::Index>(L.nominal_index(j, k)));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> predict_probs(const FittedClm& fitted, const CovariateSetting& setting) {
  const SettingPredictor p = predictor_for(fitted, setting);
  const Eigen::VectorXd tau = fitted.thresholds();
  return category_probabilities(std::span<const double>(tau.data(), static_cast<std::size_t>(tau.size())),
                                p.eta, p.alpha, p.shift, fitted.spec.link);
}

std::size_t latent_mean_category(const FittedClm& fitted, const CovariateSetting& setting) {
  const SettingPredictor p = predictor_for(fitted, setting);
  const Eigen::VectorXd tau = fitted.thresholds();
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < tau.size(); ++j) {
    const double cut = tau(j) + (p.shift.empty() ? 0.0 : p.shift[static_cast<std::size_t>(j)]);
    if (cut < p.eta) ++k;
  }
  return k;
}

std::size_t modal_category(std::span<const double> probabilities) {
  return static_cast<std::size_t>(
      std::max_element(probabilities.begin(), probabilities.end()) - probabilities.begin());
}

}  // namespace ordreg
