#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordreg/design.hpp"
#include "ordreg/links.hpp"
#include "ordreg/scale.hpp"

namespace ordreg {

/// Positions of the parameter groups in the packed vector
/// (thresholds, location, log-scale, nominal). Nominal parameters are stored
/// per nominal column, one per threshold.
struct ParameterLayout {
  std::size_t thresholds = 0;
  std::size_t location = 0;
  std::size_t scale = 0;
  std::size_t nominal = 0;  // nominal design columns

  constexpr std::size_t location_offset() const { return thresholds; }
  constexpr std::size_t scale_offset() const { return thresholds + location; }
  constexpr std::size_t nominal_offset() const { return thresholds + location + scale; }
  constexpr std::size_t nominal_index(std::size_t column, std::size_t threshold) const {
    return nominal_offset() + column * thresholds + threshold;
  }
  constexpr std::size_t size() const { return thresholds * (1 + nominal) + location + scale; }

  friend bool operator==(const ParameterLayout&, const ParameterLayout&) = default;
};

/// P(Y = k), k = 1..K, for latent location `eta`, inverse scale `alpha` and
/// per-threshold shifts `threshold_shift` (empty means no shift):
///   P_k = F(alpha (tau_k + shift_k - eta)) - F(alpha (tau_{k-1} + shift_{k-1} - eta)).
/// Throws ValidationError naming the first pair of effective thresholds that
/// is not strictly increasing.
std::vector<double> category_probabilities(std::span<const double> tau, double eta, double alpha,
                                           std::span<const double> threshold_shift,
                                           const Link& link);

/// Likelihood of a cumulative link model over a fixed design.
class ClmLikelihood {
 public:
  ClmLikelihood(const Design& design, std::span<const std::size_t> responses,
                std::size_t categories, Link link);

  const ParameterLayout& layout() const noexcept { return layout_; }
  std::size_t rows() const noexcept { return responses_.size(); }

  /// Negative log-likelihood; +infinity when thresholds are out of order or a
  /// row's probability underflows.
  double value(const Eigen::VectorXd& theta) const;
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient,
                  Eigen::MatrixXd* hessian) const;
  /// Per-row gradient of the log-likelihood (rows x parameters).
  Eigen::MatrixXd row_scores(const Eigen::VectorXd& theta) const;

  bool thresholds_ordered(const Eigen::VectorXd& theta) const;

 private:
  double accumulate(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient,
                    Eigen::MatrixXd* hessian, Eigen::MatrixXd* scores) const;

  Design design_;
  std::vector<std::size_t> responses_;
  Link link_;
  ParameterLayout layout_;
};

std::vector<std::string> parameter_names(const ParameterLayout& layout, const OrdinalScale& scale,
                                         const Design& design);

/// Negative log-likelihood of `spec` on `data` at packed parameters `theta`.
double negative_log_likelihood(const ModelSpec& spec, const Dataset& data,
                               const Eigen::VectorXd& theta);
Eigen::VectorXd nll_gradient(const ModelSpec& spec, const Dataset& data,
                             const Eigen::VectorXd& theta);

struct FitOptions {
  double tolerance = 1e-6;
  int max_iterations = 100;
  std::optional<Eigen::VectorXd> start;
  /// |coefficient| beyond this is treated as separation.
  double separation_bound = 50.0;
};

struct ConvergenceInfo {
  int iterations = 0;
  int step_halvings = 0;
  /// Inner (per-group mode) Newton iterations; mixed models only.
  long inner_iterations = 0;
  double max_abs_gradient = 0;
  double condition_number = 0;
  /// Variance component at its lower bound (mixed models only).
  bool boundary = false;
  /// Negative log-likelihood after each accepted step.
  std::vector<double> trace;

  friend bool operator==(const ConvergenceInfo&, const ConvergenceInfo&) = default;
};

struct FittedClm {
  ModelSpec spec;
  OrdinalScale scale;
  std::vector<TermCoding> location_terms;
  std::vector<TermCoding> scale_terms;
  std::vector<TermCoding> nominal_terms;
  ParameterLayout layout;
  std::vector<std::string> names;
  Eigen::VectorXd estimates;
  Eigen::MatrixXd covariance;
  double log_lik = 0;
  double aic = 0;
  std::size_t n_obs = 0;
  ConvergenceInfo convergence;
  std::vector<std::string> warnings;

  Eigen::VectorXd thresholds() const;
  Eigen::VectorXd location() const;
  Eigen::VectorXd standard_errors() const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t parameter_count() const { return static_cast<std::size_t>(estimates.size()); }
};

/// Maximum-likelihood fit. Unobserved boundary categories are dropped first
/// (recorded in `warnings`); interior empty categories are rejected.
FittedClm fit_clm(const ModelSpec& spec, const Dataset& data, const FitOptions& options = {});

/// Thresholds at link quantiles of the pooled cumulative proportions.
Eigen::VectorXd starting_thresholds(const Dataset& data, const Link& link);

/// Category probabilities for one covariate setting.
std::vector<double> predict_probs(const FittedClm& fitted, const CovariateSetting& setting);

/// Index of the most probable category.
std::size_t modal_category(std::span<const double> probabilities);

/// Index of the category whose latent interval (tau_{k-1}, tau_k] holds the
/// predicted latent mean. Equals the most probable category only when the
/// neighbouring intervals are wide enough.
std::size_t latent_mean_category(const FittedClm& fitted, const CovariateSetting& setting);

}  // namespace ordreg
