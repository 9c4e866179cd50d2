#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ordreg/links.hpp"
#include "ordreg/scale.hpp"

namespace ordreg {

/// Latent distribution with location `shift` and spread `scale` cut at
/// thresholds `tau`.
struct ForwardModel {
  std::vector<double> tau;
  double shift = 0;
  double scale = 1;
  Link link;
};

/// tau_k = link quantile of the cumulative proportion up to category k.
/// Proportions must be positive and sum to 1 within 1e-9.
std::vector<double> cutpoints_from_proportions(std::span<const double> proportions,
                                               const Link& link);

/// P_k = F((tau_k - shift) / scale) - F((tau_{k-1} - shift) / scale).
/// Throws ValidationError for unordered tau or a non-positive scale.
std::vector<double> forward_probabilities(const ForwardModel& model);

/// Draws one category index from `probabilities` by inversion.
std::size_t draw_category(std::span<const double> probabilities, double uniform);

/// n independent category indices (0-based) from the forward model.
std::vector<std::size_t> sample_ordinal(const ForwardModel& model, std::size_t n,
                                        std::uint64_t seed);

struct HierarchicalDesign {
  std::vector<double> tau;
  /// Condition levels; the first is the reference.
  std::vector<std::string> conditions;
  /// Latent shift per condition (same length as `conditions`).
  std::vector<double> beta;
  double sigma_b = 0;
  std::size_t groups = 2;
  std::size_t reps_per_cell = 1;
  Link link;
  std::string condition_name = "condition";
  std::string group_name = "participant_id";
};

/// Long-format data: every group answers every condition `reps_per_cell`
/// times with latent location beta_condition + b_group, b ~ N(0, sigma_b^2).
/// Scale labels are "1".."K".
Dataset simulate_hierarchical(const HierarchicalDesign& design, std::uint64_t seed);

}  // namespace ordreg
