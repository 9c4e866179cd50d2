#include "ordreg/simulate.hpp"

#include <cmath>
#include <limits>

#include "ordreg/errors.hpp"
#include "ordreg/random.hpp"

namespace ordreg {

std::vector<double> cutpoints_from_proportions(std::span<const double> proportions,
                                               const Link& link) {
  if (proportions.size() < 2) throw ValidationError("at least two proportions are required");
  double total = 0;
  for (std::size_t k = 0; k < proportions.size(); ++k) {
    const double p = proportions[k];
    if (!std::isfinite(p) || !(p > 0)) {
      throw ValidationError("proportion for category " + std::to_string(k + 1) +
                            " must be positive (got " + std::to_string(p) +
                            "); collapse empty categories into a neighbour");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("proportions must sum to 1 (sum is " + std::to_string(total) + ")");
  }
  std::vector<double> tau;
  tau.reserve(proportions.size() - 1);
  double lower = 0;  // cumulative from below
  for (std::size_t k = 0; k + 1 < proportions.size(); ++k) {
    lower += proportions[k];
    double upper_tail = 0;
    for (std::size_t j = k + 1; j < proportions.size(); ++j) upper_tail += proportions[j];
    // past the median use the upper-tail sum for accuracy
    tau.push_back(lower <= 0.5 ? link.quantile(lower) : link.quantile(1.0 - upper_tail));
    if (tau.size() > 1 && !(tau.back() > tau[tau.size() - 2])) {
      throw ValidationError("proportion for category " + std::to_string(k + 1) +
                            " is too small to separate its cutpoints");
    }
  }
  return tau;
}

std::vector<double> forward_probabilities(const ForwardModel& model) {
  if (!(model.scale > 0) || !std::isfinite(model.scale)) {
    throw ValidationError("latent scale must be positive and finite");
  }
  if (!std::isfinite(model.shift)) throw ValidationError("latent shift must be finite");
  if (model.tau.empty()) throw ValidationError("at least one threshold is required");
  for (std::size_t k = 0; k < model.tau.size(); ++k) {
    if (!std::isfinite(model.tau[k])) throw ValidationError("thresholds must be finite");
    if (k > 0 && !(model.tau[k] > model.tau[k - 1])) {
      throw ValidationError("thresholds out of order: tau[" + std::to_string(k) +
                            "] must exceed tau[" + std::to_string(k - 1) + "]");
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> probs(model.tau.size() + 1);
  double lower = -inf;
  for (std::size_t k = 0; k <= model.tau.size(); ++k) {
    const double upper = k < model.tau.size() ? (model.tau[k] - model.shift) / model.scale : inf;
    probs[k] = model.link.interval_probability(lower, upper);
    lower = upper;
  }
  return probs;
}

std::size_t draw_category(std::span<const double> probabilities, double uniform) {
  double cumulative = 0;
  for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
    cumulative += probabilities[k];
    if (uniform < cumulative) return k;
  }
  return probabilities.size() - 1;
}

std::vector<std::size_t> sample_ordinal(const ForwardModel& model, std::size_t n,
                                        std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample size must be at least 1");
  const auto probs = forward_probabilities(model);
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& y : out) y = draw_category(probs, rng.uniform());
  return out;
}

Dataset simulate_hierarchical(const HierarchicalDesign& design, std::uint64_t seed) {
  if (!(design.sigma_b >= 0) || !std::isfinite(design.sigma_b)) {
    throw ValidationError("sigma_b must be finite and >= 0");
  }
  if (design.groups < 2) throw ValidationError("at least two groups are required");
  if (design.conditions.empty() || design.conditions.size() != design.beta.size()) {
    throw ValidationError("one beta per condition is required");
  }
  if (design.reps_per_cell < 1) throw ValidationError("reps_per_cell must be at least 1");
  std::vector<std::string> labels;
  for (std::size_t k = 0; k <= design.tau.size(); ++k) labels.push_back(std::to_string(k + 1));
  OrdinalScale scale(labels);

  const std::size_t width = std::to_string(design.groups).size();
  std::vector<std::string> group_levels;
  for (std::size_t g = 0; g < design.groups; ++g) {
    std::string id = std::to_string(g + 1);
    group_levels.push_back("g" + std::string(width - id.size(), '0') + id);
  }

  Rng effects(seed, 0);
  Rng responses(seed, 1);
  std::vector<std::size_t> y, condition_codes, group_codes;
  ForwardModel model{design.tau, 0.0, 1.0, design.link};
  for (std::size_t g = 0; g < design.groups; ++g) {
    const double b = design.sigma_b * effects.normal();
    for (std::size_t c = 0; c < design.conditions.size(); ++c) {
      model.shift = design.beta[c] + b;
      const auto probs = forward_probabilities(model);
      for (std::size_t r = 0; r < design.reps_per_cell; ++r) {
        y.push_back(draw_category(probs, responses.uniform()));
        condition_codes.push_back(c);
        group_codes.push_back(g);
      }
    }
  }
  FactorColumn condition{Factor(design.condition_name, design.conditions), condition_codes};
  FactorColumn group{Factor(design.group_name, group_levels), group_codes};
  return Dataset(scale, std::move(y), {condition}, {}, group);
}

}  // namespace ordreg
