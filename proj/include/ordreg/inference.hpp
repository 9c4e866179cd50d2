#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ordreg/clm.hpp"
#include "ordreg/clmm.hpp"

namespace ordreg {

struct WaldRow {
  std::string name;
  double estimate = 0;
  double std_error = 0;
  double z = 0;
  double p = 1;
};

/// Estimate, SE, z = estimate / SE and two-sided normal p for every
/// parameter, in packed order. Throws when a variance is not positive.
std::vector<WaldRow> wald_table(const FittedClm& fitted);

struct TestStatistic {
  double statistic = 0;
  double df = 0;
  double p = 1;
};

/// 2 (logLik_full - logLik_null), clamped at 0, against chi-square with the
/// parameter-count difference as df. Throws unless `null_fit` is nested in
/// `full_fit` (same data size, scale, link; term sets contained).
TestStatistic likelihood_ratio_test(const FittedClm& null_fit, const FittedClm& full_fit);

struct BrantTerm {
  std::string column;
  TestStatistic test;
};

struct BrantResult {
  std::vector<BrantTerm> columns;
  TestStatistic omnibus;
};

/// Proportional-odds check: fits every binary split Y <= k vs Y > k with the
/// same link and tests equality of the location coefficients across splits
/// (Wald, joint covariance from stacked per-row scores).
BrantResult brant_test(const FittedClm& fitted, const Dataset& data);

enum class Adjustment { none, bonferroni, holm };
Adjustment parse_adjustment(std::string_view name);
std::string adjustment_name(Adjustment adjustment);
/// Adjusted p-values in input order.
std::vector<double> adjust_p_values(const std::vector<double>& p, Adjustment adjustment);

struct ContrastResult {
  std::string level_a;
  std::string level_b;
  double estimate = 0;  // beta_a - beta_b on the latent scale
  double std_error = 0;
  double z = 0;
  double p_raw = 1;
  double p_adjusted = 1;
  Adjustment adjustment = Adjustment::holm;
};

/// Latent difference between two levels of a location factor.
ContrastResult contrast(const FittedClm& fitted, const std::string& factor,
                        const std::string& level_a, const std::string& level_b);

/// All unordered level pairs (later level minus earlier level, in factor
/// level order) with the adjustment applied across the family.
std::vector<ContrastResult> pairwise_contrasts(const FittedClm& fitted, const std::string& factor,
                                               Adjustment adjustment = Adjustment::holm);

struct BootstrapOptions {
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  double level = 0.95;
  /// Numeric code per category of the original scale; default 1..K.
  std::vector<double> scores;
  unsigned threads = 1;
};

struct BootstrapCI {
  std::string level_a;
  std::string level_b;
  /// Expected-score difference (a - b) on the original data.
  double estimate = 0;
  double lower = 0;
  double upper = 0;
  double level = 0.95;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  std::uint64_t seed = 0;
};

/// Expected numeric score sum_k score_k P(Y = k) for each level of `factor`.
std::vector<double> expected_scores(const FittedClm& fitted, const std::string& factor,
                                    const OrdinalScale& original,
                                    const std::vector<double>& scores);

/// Case resampling stratified by `factor`; replicate r uses Rng(seed, r + 1).
/// Replicates whose refit fails are dropped and counted; more than 5% of B
/// failing is an error. Percentile interval (type-7 quantiles).
std::vector<BootstrapCI> bootstrap_response_scale_ci(
    const ModelSpec& spec, const Dataset& data, const std::string& factor,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const BootstrapOptions& options = {});

/// Sample quantile, type 7 (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double probability);

struct Interpretation {
  std::string term;
  std::string link;
  double estimate = 0;
  double std_error = 0;
  double p = 1;
  std::optional<double> odds_ratio;
  std::string text;
};

struct InterpretationContext {
  std::string response = "the response";
  /// Reference level wording, e.g. "Active"; taken from the fit when empty.
  std::string reference;
  double alpha = 0.05;
};

/// Plain-language reading of one location coefficient: odds ratios for
/// logit, latent standard units for probit and cloglog.
Interpretation interpret_coefficient(const FittedClm& fitted, const std::string& term,
                                     const InterpretationContext& context = {});

}  // namespace ordreg
